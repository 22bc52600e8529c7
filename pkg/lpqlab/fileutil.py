"""
File names for exported criterion curves.

Criterion tags such as ``A_H*`` or ``C_q>1`` contain characters that some
file systems refuse. Operators are spelled out first, then whatever is still
illegal is replaced the way chromium sanitizes download names.
"""

import unicodedata

_SPELLED = str.maketrans({'*': 'star', '>': 'gt', '<': 'lt', '=': 'eq', "'": 'prime'})


def is_illegal_anywhere(c: str) -> bool:
    """Reserved punctuation, control and format characters, and noncharacters"""
    i = ord(c)
    return (
        c in R'"~*/:<>?\|'
        or unicodedata.category(c) in {'Cc', 'Cf'}
        or 0xFDD0 <= i <= 0xFDEF
        or (i & 0xFFFE) == 0xFFFE
    )


def is_illegal_at_ends(c: str) -> bool:
    return c.isspace() or c == '.'


def replace_illegal_characters(file_name: str, replace_char: str = '_') -> str:
    last = len(file_name) - 1
    return ''.join(
        replace_char
        if is_illegal_anywhere(c) or (i in (0, last) and is_illegal_at_ends(c))
        else c
        for i, c in enumerate(file_name)
    )


def curve_filename(tag: str, suffix: str = '.csv') -> str:
    stem = replace_illegal_characters(tag.translate(_SPELLED))
    return (stem or 'curve') + suffix
