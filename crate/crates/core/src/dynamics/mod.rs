//! Generation dynamics: Raman atom-field coupling, trapped-ion pulses and
//! collective decay.

pub mod ion;
pub mod lindblad;
pub mod raman;

pub use ion::{
    gauge_optimized_fidelity, ion_r, ion_rplus, ion_w_search, ion_w_sequence, IonSearch,
    IonSequenceRun, PulseOrder, RaisingConvention,
};
pub use lindblad::{df_check, lindblad_collective_decay, lindblad_trajectory, DfCheck};
pub use raman::{raman_closed_form, raman_numeric, AtomFieldState};
