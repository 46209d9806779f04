//! Independent reference prices: a Bermudan binomial tree, closed-form
//! European prices and the published exact values.

mod analytic;
mod binomial;
mod bivariate;
mod tables;

pub use analytic::{bestof2_european_call, bs_european_call, bs_european_put};
pub use binomial::binomial_bermudan_put;
pub use bivariate::bivariate_normal_cdf;
pub use tables::{reference_price, ReferenceEntry, ReferencePrice, REFERENCE_TABLE};
