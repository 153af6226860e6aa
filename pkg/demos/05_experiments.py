"""Run the three seeded studies at desk scale and print their median rows.
The same runs are available from the command line via `topostat experiment`."""
from topostat.experiments import ExperimentConfig, read_experiment_csv, run_experiment

if __name__ == "__main__":
    for kind in ("cov", "denoise", "interp"):
        cfg = ExperimentConfig.desk(kind, trials=5)
        rows = [r for r in read_experiment_csv(run_experiment(cfg)) if r["trial"] == "median"]
        print(f"--- {kind}")
        for r in rows:
            print(f"{r['method']:14s} {r['sweep_param']}={r['sweep_value']:<6s} median error {float(r['error']):.4g}")
