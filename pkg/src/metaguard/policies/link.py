"""Linking meta code in front of a base program."""
from __future__ import annotations

from ..core_lang import parse
from ..core_lang.syntax import Lit, Program, Seq


class LinkError(ValueError):
    pass


def link(base: Program, meta_text: str, file: str = "<meta>") -> Program:
    """Prepend the meta program to ``base``.

    Meta labels are allocated above every base label, so base labels (and
    their spans) are unchanged; meta nodes are flagged and never trapped.
    """
    if base.linked:
        raise LinkError(f"{base.file} is already linked")
    if base.instrumented:
        raise LinkError(f"{base.file} is already instrumented")
    top = max(base.label_table, default=-1) + 1
    mp = parse(meta_text, file, meta=True, label_base=top)
    table = dict(base.label_table)
    if type(mp.body) is Lit and mp.body.value is None and len(mp.label_table) == 1:
        # nothing to link
        return Program(body=base.body, label_table=table, file=base.file, linked=True,
                       nodes=dict(base.nodes), key=base.key)
    table.update(mp.label_table)
    label = max(table) + 1
    table[label] = base.body.span
    body = Seq(label=label, span=base.body.span, meta=True, first=mp.body, second=base.body)
    return Program(body=body, label_table=table, file=base.file,
                   meta_labels=frozenset(mp.label_table) | {label}, linked=True,
                   key=base.key)
