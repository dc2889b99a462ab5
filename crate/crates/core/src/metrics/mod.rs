//! System-level measurements over meme records and feed snapshots.

mod diversity;
mod kendall;
mod mi;
mod popularity;
mod powerlaw;

pub use diversity::{diversity_entropy, normalized_diversity};
pub(crate) use diversity::entropy_of_counts;
pub use kendall::{kendall_tau_b, tau_counts, TauCounts};
pub use mi::{mutual_information, mutual_information_table};
pub use popularity::{
    ccdf, ks_two_sample, log_binned_pdf, mean_popularity_by_quality, popularity_by_quality_group,
    QualityBin, QualityGroups,
};
pub use powerlaw::{fit_power_law, fit_with_xmin, hurwitz_zeta, PowerLawFit, MIN_TAIL};

/// Tau-b between quality and popularity.
pub fn discriminative_power(records: &[(f64, u64)]) -> crate::Result<f64> {
    let pairs: Vec<(f64, f64)> = records.iter().map(|&(f, p)| (f, p as f64)).collect();
    kendall_tau_b(&pairs)
}
