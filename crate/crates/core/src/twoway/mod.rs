//! Two-way automata: classical head with a quantum register (2QCFA) and
//! quantum head (1.5-way and two-way KWQFA).

pub mod families;
pub mod kwqfa;
pub mod tqcfa;

pub use families::{
    build_eq_15kwqfa, build_eq_tqcfa, build_pal_tqcfa, eq_quantum_phase_reject, loop_semantics,
    pal_quantum_phase_reject, tqcfa_exact_accept, Family, LoopProfile,
};
pub use kwqfa::{
    check_wellformed, twoway_kwqfa_run, ConfigState, LocalTransition, TwoWayKwqfa, TwoWayRun,
};
pub use tqcfa::{tqcfa_monte_carlo, MonteCarloStats, QuantumAction, Rule, Tqcfa, TrialOutcome};
