"""Simulation and analysis of optically chopped Rydberg-atom ULF electrometry."""

from .dynamics import (DriveProfile, Trajectory, analytic_off_phase,
                       analytic_on_phase, build_hamiltonian, chopped_rabi,
                       depletion_check, evolve, lindblad_rhs)
from .field import (CalibrationFit, ElectrodeGeometry, FieldScenario,
                    calibrate_factor, e_read, estimate_beta, field_from_shift,
                    linearized_shift, pd_voltage, stark_shift, total_field)
from .lockin import (DemodOutput, LockInConfig, demodulate, lowpass,
                     make_reference, mix, oca_pipeline)
from .signal_chain import (ChopperConfig, NoiseModel, apply_chop,
                           predicted_demod_spectrum, predicted_enhancement_db,
                           synth_one_over_f)
from .spectral import (SensitivityReport, enhancement_db, psd_welch,
                       rbw_to_config, sensitivity_report)
from .traces import SampledTrace, Spectrum

__version__ = "0.1.0"
