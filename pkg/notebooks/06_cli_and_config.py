# %% [markdown]
# # Driving the lab from the command line
#
# Everything above is also available via the ``aonlab`` console script.
# This script calls the same entry point in-process.

# %%
import pathlib
import tempfile

from aonlab.cli import main

main(["bounds", "--p", "10", "--k", "2", "--sigma2", "0.2", "--trials", "500"])

# %%
with tempfile.TemporaryDirectory() as tmp:
    ini = pathlib.Path(tmp, "run.ini")
    ini.write_text(
        "[model]\np = 12\nk = 2\nsigma2 = 0.05\n"
        "[sweep]\nratios = 0.5 1 2\ntrials = 100\ntasks = mmse detect_linear divergence\n"
        "[run]\nseed = 7\ntiming = no\n"
    )
    main(["sweep", "--config", str(ini)])
    main(["sweep", "--config", str(ini), "--ratios", "3", "--format", "json"])
