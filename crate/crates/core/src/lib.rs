//! Quantum probe spectroscopy on a statevector simulator.
//!
//! An ancilla qubit with tunable frequency `ω` is weakly coupled to a system
//! through `c·A⊗σ_x`. Sweeping `ω` and reading whether the probe flipped
//! reveals the system's transition energies. The crate provides
//!
//! * Pauli-sum and dense Hamiltonians ([`pauli`], [`model`]),
//! * exact and product-formula time evolution ([`evolve`]),
//! * frequency sweeps, peak detection, the closed-form Rabi predictor and
//!   eigenstate preparation by resonant steps ([`spectroscopy`]),
//! * classical reference quantities for checking all of the above ([`oracle`]).

pub mod error;
pub mod evolve;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod spectroscopy;
pub mod state;

pub use error::{Error, Result};
pub use evolve::{exact_propagate, trotter_propagate, TrotterOrder, TrotterPlan};
pub use model::{
    assemble_total, embed_dense, preset_coupling, CouplingOperator, CouplingPreset, Model,
    ProbeConfig, ProbeState, SystemHamiltonian, TotalHamiltonian,
};
pub use oracle::{eigendecompose, transition_table, EigenSystem, TransitionTable};
pub use pauli::{PauliLetter, PauliString, PauliSum};
pub use spectroscopy::{
    detect_peaks, prepare_eigenstate_chain, rabi_predict, run_sweep, Method, Peak, Spectrum,
    SweepMode, SweepPlan, ThresholdPolicy, TransitionRecord,
};
pub use state::Statevector;
