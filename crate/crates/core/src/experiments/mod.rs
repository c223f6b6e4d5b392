//! Drivers for the counterexample sweeps, positive weak-type checks, the
//! ℍ → 𝔻² transport and the model integrals.

mod e1;
mod families;
mod forelli_rudin;

pub use e1::{e1_bounds, exp_integral_e1, exp_integral_e1_ln, scaled_e1, EULER_GAMMA};
pub use families::*;
pub use forelli_rudin::{classify, forelli_rudin, FrKind, FrValue, Regime};
mod sweep;
mod weak;

pub use sweep::{RowFlag, SweepFit, SweepResult, SweepRow};
pub use weak::*;
mod transport;

pub use transport::{default_transport_suite, transport_check, transport_to_bidisc, TransportCheck, Transported};
mod orlicz;

pub use orlicz::{
    default_mapping_suite, disc_mapping_check, disc_orlicz_norm, disc_peak, fs_orlicz_norm, llogl_weak_sweep, polydisc_orlicz_check,
    MappingCase, MappingRow, PolydiscOrliczCheck,
};
