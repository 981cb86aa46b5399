"""Write the contact topology of a config to CSV, for reuse or inspection.

    python scripts/export_topology.py configs/smoke.json out/topo
    jcpd run configs/smoke.json --set 'visibility.topology={"edges_csv": "...", "anchors_csv": "..."}'
"""

import argparse

from jcpd import config as cfgmod
from jcpd.scenario import build_scenario
from jcpd.visibility import export_topology, topology_paths

ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
ap.add_argument("config")
ap.add_argument("outdir")
ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
args = ap.parse_args()

sc = build_scenario(cfgmod.check_config(cfgmod.apply_overrides(cfgmod.load_config(args.config), args.set)))
edges, anchors = topology_paths(args.outdir)
edges.parent.mkdir(parents=True, exist_ok=True)
export_topology([sc.contact_graph(s) for s in range(sc.n_states)], edges, anchors)
print(f"{sc.n_states} states -> {edges}, {anchors}")
