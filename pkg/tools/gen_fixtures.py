"""Regenerate the canonical catalog fixture files.

Run from the repository root::

    python tools/gen_fixtures.py

Writes ``src/riskbn/fixtures/<version>/`` plus ``manifest.json``.  The
builders in :mod:`riskbn.catalog` are fully seeded, so the output is
deterministic; a test locks the committed files to them.
"""

from __future__ import annotations

import pathlib

from riskbn import catalog
from riskbn.network import BayesNet, canonical_json, save
from riskbn.temporal import dynamic_save

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "src" / "riskbn" / "fixtures" / catalog.FIXTURE_VERSION


def write_net(path: pathlib.Path, net, entry: catalog.CatalogEntry, variant: str | None):
    meta = {
        "catalog_id": entry.id,
        "figure": list(entry.figure),
        "doc": entry.doc,
    }
    if variant:
        meta["variant"] = variant
    text = save(net, meta) if isinstance(net, BayesNet) else dynamic_save(net, meta)
    path.write_text(text)
    print("wrote", path.relative_to(ROOT))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for cid in catalog.catalog_ids():
        entry = catalog.build(cid)
        write_net(OUT / f"{cid}.json", entry.net, entry, None)
        for name, net in entry.variants.items():
            write_net(OUT / f"{cid}__{name}.json", net, entry, name)
    manifest_path = OUT.parent / "manifest.json"
    manifest_path.write_text(canonical_json(catalog.manifest()) + "\n")
    print("wrote", manifest_path.relative_to(ROOT))


if __name__ == "__main__":
    main()
