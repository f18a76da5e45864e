"""Check reference generation from registry introspection."""

from pathlib import Path

from auctionlab.checks import default_registry


def get_check_metadata(name: str) -> dict:
    info = default_registry.info(name)
    suite = default_registry.suite_of(name)
    return {
        "name": info.name,
        "suite": suite.id,
        "suite_label": suite.label,
        "scope": info.scope,
        "claim": info.claim,
        "description": info.description,
        "gated": suite.min_n,
    }


def _anchor(label: str) -> str:
    return label.lower().replace(" ", "-").replace("(", "").replace(")", "")


def generate_check_reference() -> str:
    """Generate the CHECK_REFERENCE.md content: every check and the claim it encodes."""
    lines = []
    lines.append("# Auction Lab Check Reference")
    lines.append("")
    lines.append("Every check run by `auctionlab verify`, grouped by suite.")
    lines.append("")
    lines.append(
        "> **Note:** This file is auto-generated. Run `auctionlab verify --list` to update."
    )
    lines.append("")

    by_suite: dict[str, list[dict]] = {}
    for name in default_registry.list_checks():
        meta = get_check_metadata(name)
        by_suite.setdefault(meta["suite"], []).append(meta)

    suites = sorted(default_registry.suites.values(), key=lambda s: s.order)

    lines.append("## Table of Contents")
    lines.append("")
    for suite in suites:
        if suite.id in by_suite:
            lines.append(f"- [{suite.label}](#{_anchor(suite.label)})")
    lines.append("")

    total = 0
    for suite in suites:
        checks = by_suite.get(suite.id)
        if not checks:
            continue
        lines.append(f"## {suite.label}")
        lines.append("")
        if suite.min_n:
            lines.append("> Cases below N_min are skipped.")
            lines.append("")
        lines.append("| Check | Scope | Claim |")
        lines.append("|-------|-------|-------|")
        for meta in checks:
            lines.append(f"| `{meta['name']}` | {meta['scope']} | {meta['claim']} |")
        lines.append("")
        for meta in checks:
            if meta["description"] and meta["description"] != meta["claim"]:
                lines.append(f"- `{meta['name']}`: {meta['description']}")
        if any(m["description"] for m in checks):
            lines.append("")
        total += len(checks)

    lines.append("---")
    lines.append("")
    lines.append(f"**Total checks:** {total}")
    lines.append("")
    return "\n".join(lines)


def write_check_reference(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(generate_check_reference(), encoding="utf-8")
    return path
