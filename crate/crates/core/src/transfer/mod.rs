//! Zonal transfer operators on `U(2)/U(1)² × U(1,1)/U(1)²` and their
//! sector spectra.

pub mod operator;
pub mod sectors;
pub mod special;
pub mod zonal;

pub use operator::{
    assemble_transfer, default_s_max, evaluate_sigma_model, GridReport, KernelOrder, SigmaModelValue, TransferOperator,
    TransferParams,
};
pub use sectors::{
    compact_sector, correction_eigenvalue, hyperbolic_offdiag_eigenvalues, hyperbolic_sector, ks_eigenvalue,
    ku_eigenvalue, moment_identities_check, offdiag_eigenvalues, s_moment, symbol_sector_eigenvalue, u_moment,
    CorrectionEigenvalue, MomentReport, OffDiagonal, SectorSpectrum,
};
pub use special::{conical, hyperbolic_rep_function, legendre_p, rep_function};
pub use zonal::{nystrom_eigenvalues, zonal_kernel_matrix, BandedMatrix, GridSpec, ZonalGrid, ZonalKernels};
