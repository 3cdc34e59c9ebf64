from roughsurf.tools import load_experiment_config

config = load_experiment_config('bump.experiment.yml')
basis = config.basis()
profile = config.true_profile()
