//! Links of isolated branch points of real surfaces in R^4.
//!
//! A branched disk `f(z) = (w1(z, zbar), w2(z, zbar))` meets a small sphere
//! `|q| = eps` about its branch point in a closed curve. This crate traces that
//! curve, presents it as a closed braid about a plane, and computes
//!
//! - the braid index and the algebraic crossing number `e` of the braid diagram,
//! - the same `e` as the linking number of the curve with a push-off,
//! - Gauss linking numbers between the components of a multi-disk configuration
//!   and the normal-degree contribution `E = sum e_i + 2 sum lk_ij`,
//! - for Micallef-White disks `(z^N, P(z))`, the signed double points of the
//!   perturbation `(z^N, P(z) + lambda z)` and the gcd-cascade closed form, which
//!   must agree with the diagram.
//!
//! Modules, in pipeline order: [`zpoly`] (polynomials in `z, zbar`), [`diskspec`]
//! (the `.sing` configuration language), [`tracer`], [`braid`], [`invariants`],
//! [`census`], and [`analysis`], which ties them together and produces the
//! versioned report used by the `singlink` command line ([`cli`]).
//!
//! ```
//! use singlink::analysis::{analyze, RunConfig};
//! use singlink::diskspec::parse_config;
//!
//! let cfg = parse_config("disk t { w1 = z^2; w2 = z^3; }").unwrap();
//! let report = analyze(&cfg, &RunConfig::default()).unwrap().report;
//! assert_eq!(report.components[0].e, 3);
//! assert_eq!(report.components[0].braid_word, vec![1, 1, 1]);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod braid;
pub mod census;
pub mod cli;
pub mod diskspec;
pub mod geom;
pub mod invariants;
pub mod tracer;
pub mod zpoly;
