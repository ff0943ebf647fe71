//! p-curvature of connections, q-adic valuation analysis, deformation
//! equations and finiteness certificates for rank-2 surface-group
//! representations.

pub mod connection;
pub mod deformation;
pub mod surface_group;
pub mod valuation;

pub use connection::{
    cyclic_vector, frobenius_twist_multiplier, gauge_transform, nabla_power_matrix, nabla_powers,
    p_curvature, psi_matrix, scan_primes, CompanionConnection, ConnectionError, ConnectionMatrix,
    Derivation, PCurvatureReport,
};

pub type QConnection = ConnectionMatrix<pcurv_exact::Rational>;
pub type FpConnection = ConnectionMatrix<pcurv_exact::Fp>;
pub type QDerivation = Derivation<pcurv_exact::Rational>;
