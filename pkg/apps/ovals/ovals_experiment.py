import logging
from pathlib import Path

import ovals.config
import ovals.experiments

logging.basicConfig(level=logging.INFO)

# make the ExperimentConfig; any field of the config file grammar can be set here
cfg = ovals.config.build_config(
    {
        "tag": "radial-asymptotics",
        "n": 3,
        "k": 2,
        "ell": 16.0,
        "m": 256,
        "out": "out/radial_ell16",
    }
)

# run the flow, renormalize, and check every region and monitor
record = ovals.experiments.run_experiment(cfg)

# write CSV tables, snapshots, the manifest and the summary table
ovals.experiments.emit_outputs(record, Path(cfg.out), cfg)

for name, ok in sorted(record.checks.items()):
    logging.info("%s: %s", name, "PASS" if ok else "FAIL")
