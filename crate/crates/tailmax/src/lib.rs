//! Tail orders of maximal and diagonal dependence for bivariate series.
//!
//! A bivariate copula `C` may concentrate its lower-tail mass away from the
//! diagonal. Along the diagonal, `C(u,u) ~ ℓ(u) u^κ` defines the tail order
//! of diagonal dependence (TODD). Searching instead over all rectangles
//! `[0,x] × [0, u²/x]` of area `u²` anchored at the origin and following the
//! maximizing corner yields `Π*(u) ~ ℓ*(u) u^{κ*}` with `κ* ≤ κ`, the tail
//! order of maximal dependence (TOMD). Smaller orders mean stronger extreme
//! co-movements, so TOMD never understates the dependence the diagonal view
//! can miss.
//!
//! The crate provides:
//!
//! - [`copula`] — analytic copulas (independence, Marshall–Olkin, generalized
//!   Clayton) with closed-form maximal-dependence paths, used as exact oracles;
//! - [`empirical`] — pseudo-observations, the empirical copula, the empirical
//!   rectangle maximizer and the diagonal selection;
//! - [`estimators`] — the average block-minima TOMD estimator, the log-rank
//!   OLS TODD estimator, and their relative difference;
//! - [`simulation`] — an AR(1)-driven generalized-Clayton pair generator and
//!   the replication study machinery;
//! - [`gof`] — one-sided K-S / C-vM / A-D tests of the lower bound
//!   `F*_q(u,v) ≥ uv` with resampled critical values;
//! - [`portmanteau`] — multivariate white-noise diagnostics;
//! - [`data`] — CSV ingestion and log-return preparation;
//! - [`report`] — JSON/CSV/SVG artifacts shared with the command-line tool.

pub mod copula;
pub mod data;
pub mod empirical;
pub mod error;
pub mod estimators;
pub mod gof;
pub mod portmanteau;
pub mod report;
pub mod seeding;
pub mod simulation;

pub use error::{Error, Result};
