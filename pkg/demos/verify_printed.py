"""Compare the generated hierarchies with hand transcriptions of the published
displays, and with corrected transcriptions.

Every non-match against a printed file is a known misprint; the corrected files
match term for term.
"""
from __future__ import annotations

from pathlib import Path

from mpqed.cli.config import load_config
from mpqed.cli.reference import parse_document
from mpqed.cli.verify import generate_blocks, verify_document

for system in ("hydrogen", "helium", "lithium"):
    for variant in ("printed", "oracle"):
        cfg = load_config(system, reference=f"{system}.{variant}.ref")
        doc = parse_document(Path(cfg.reference_path()).read_text(), cfg.registry)
        gen = generate_blocks(cfg, [b.key for b in doc.blocks], doc.header.get("scheme"))
        rep = verify_document(doc, gen)
        counts = {k: v for k, v in rep.summary().items() if v}
        print(f"{system:9} {variant:8} {counts}")
        for e in rep.discrepancies:
            print(f"    {e.block}: {e.status}, residual {e.residual}")
