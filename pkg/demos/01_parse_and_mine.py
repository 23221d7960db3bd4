"""
Parsing a router config and mining context for one line
=======================================================

Parse the bundled Junos-style fixture, list a few lines in ``set`` form and
show the four context sets for an interface address line.
"""

from confctx import ContextType, PathSelector, assemble_bundle, parse_juniper, resolve_selector
from confctx.mutation import fixture_text

tree = parse_juniper(fixture_text("rtsw-alba.conf"), "rtsw-alba.conf")
print(f"{len(tree.paths)} lines parsed")
for p in tree.paths[:5]:
    print("  ", p.set_line())

# pick a line the way a user would: by its set-line rendering
line = "set interfaces ge-0/0/0 unit 0 family inet filter input-list v4filter"
p = resolve_selector(tree, PathSelector(set_line=line))
print(f"\nline under review (path {p.path_id}, depth {p.depth}):\n   {line}")

bundle = assemble_bundle(tree, p, set(ContextType) - {ContextType.INTRA_ROUTER})
for ctype in (ContextType.NEIGHBORING, ContextType.SIMILAR, ContextType.REFERENCEABLE):
    entries = bundle.lines(ctype)
    print(f"\n{ctype.wire}: {len(entries)} lines")
    for text in entries[:6]:
        print("  ", text)

# the filter name v4filter is defined under `firewall family inet filter v4filter`,
# so the referenceable set shows the filter body
