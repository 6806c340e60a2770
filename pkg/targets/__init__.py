from targets.augmented import AugmentedTarget, GappedTarget, augmented_potential, rejection_filter
from targets.mixture import GaussianMixture, mixture_potential
from targets.power import PowerPotential, power_potential
from targets.sensor import (HyperConditional, SensorPosterior, default_sensor_dataset,
                            generate_sensor_data, hyper_potential, sensor_potential)
