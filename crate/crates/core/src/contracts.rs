//! Payoffs and the ordered regression basis families of the three option cases.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PayoffKind {
    /// `max(K - S_1, 0)` on a single asset.
    PutSingle,
    /// `max(max(S_1, S_2) - K, 0)`.
    BestOfCall,
    /// `max(sum_j w_j S_j - K, 0)`.
    BasketCall,
}

impl PayoffKind {
    pub fn name(self) -> &'static str {
        match self {
            PayoffKind::PutSingle => "put",
            PayoffKind::BestOfCall => "bestof",
            PayoffKind::BasketCall => "basket",
        }
    }

    pub fn assets(self) -> usize {
        match self {
            PayoffKind::PutSingle => 1,
            PayoffKind::BestOfCall => 2,
            PayoffKind::BasketCall => 4,
        }
    }
}

impl fmt::Display for PayoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PayoffKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "put" | "put_single" => Ok(PayoffKind::PutSingle),
            "bestof" | "best-of" | "bestof_call" => Ok(PayoffKind::BestOfCall),
            "basket" | "basket_call" => Ok(PayoffKind::BasketCall),
            _ => Err(Error::UnknownPayoff(s.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffSpec {
    kind: PayoffKind,
    strike: f64,
    weights: Vec<f64>,
}

impl PayoffSpec {
    pub fn new(kind: PayoffKind, strike: f64) -> Result<Self> {
        let weights = match kind {
            PayoffKind::BasketCall => vec![0.25; 4],
            _ => Vec::new(),
        };
        Self::with_weights(kind, strike, weights)
    }

    pub fn with_weights(kind: PayoffKind, strike: f64, weights: Vec<f64>) -> Result<Self> {
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(Error::InvalidPayoff(format!("strike must be positive, got {strike}")));
        }
        if kind == PayoffKind::BasketCall {
            let total: f64 = weights.iter().sum();
            if weights.is_empty() || (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidPayoff(format!("basket weights must sum to 1, got {total}")));
            }
        } else if !weights.is_empty() {
            return Err(Error::InvalidPayoff(format!("{kind} takes no weights")));
        }
        Ok(Self { kind, strike, weights })
    }

    pub fn kind(&self) -> PayoffKind {
        self.kind
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// All three payoffs are floored at zero, which enables the
    /// continue-on-zero-payout rule.
    pub fn nonnegative(&self) -> bool {
        true
    }

    /// Number of assets the payoff reads.
    pub fn assets(&self) -> usize {
        match self.kind {
            PayoffKind::BasketCall => self.weights.len(),
            kind => kind.assets(),
        }
    }

    /// Payoff at `state`, not discounted.
    pub fn payout(&self, state: &[f64]) -> f64 {
        match self.kind {
            PayoffKind::PutSingle => (self.strike - state[0]).max(0.0),
            PayoffKind::BestOfCall => (state[0].max(state[1]) - self.strike).max(0.0),
            PayoffKind::BasketCall => {
                let basket: f64 = self.weights.iter().zip(state).map(|(w, s)| w * s).sum();
                (basket - self.strike).max(0.0)
            }
        }
    }
}

/// Payoff at `state` and time `t`, discounted to time 0 at rate `rate`.
pub fn discounted_payout(spec: &PayoffSpec, state: &[f64], t: f64, rate: f64) -> f64 {
    libm::exp(-rate * t) * spec.payout(state)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Constant,
    /// The discounted payout `Z`.
    Payoff,
    /// `prod_j S_j^{e_j}`.
    Monomial(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSpec {
    case: PayoffKind,
    terms: Vec<Term>,
}

/// Largest supported put basis (`S_1^18`).
pub const MAX_PUT_BASIS: usize = 20;
const BESTOF_SIZES: &[usize] = &[4, 7, 11];
const BASKET_SIZES: &[usize] = &[6, 10, 16];

impl BasisSpec {
    pub fn case(&self) -> PayoffKind {
        self.case
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Writes the basis row for `state` with discounted payout `z` into `out`.
    pub fn fill_row(&self, state: &[f64], z: f64, out: &mut [f64]) {
        for (o, term) in out.iter_mut().zip(&self.terms) {
            *o = match term {
                Term::Constant => 1.0,
                Term::Payoff => z,
                Term::Monomial(exps) => {
                    exps.iter().zip(state).filter(|(&e, _)| e > 0).map(|(&e, &s)| libm::pow(s, e as f64)).product()
                }
            };
        }
    }
}

fn monomial(exps: &[u32]) -> Term {
    Term::Monomial(exps.to_vec())
}

/// The first `m` terms of the fixed basis ordering for `case`.
///
/// * put: `1, Z, S, S^2, ..., S^(m-2)`
/// * best-of: `1, Z`, then monomials of degree 1, 2, 3, lexicographic within
///   degree (`m` in 4, 7, 11)
/// * basket: `1, Z, S_1..S_4, S_1^2..S_4^2`, then the cross products
///   `S_1S_2, S_1S_3, S_1S_4, S_2S_3, S_2S_4, S_3S_4` (`m` in 6, 10, 16)
pub fn basis_family(case: PayoffKind, m: usize) -> Result<BasisSpec> {
    let mut terms = vec![Term::Constant, Term::Payoff];
    match case {
        PayoffKind::PutSingle => {
            if !(2..=MAX_PUT_BASIS).contains(&m) {
                return Err(Error::UnsupportedBasis { case: "put", m, supported: "2..=20" });
            }
            terms.extend((1..=m as u32 - 2).map(|p| monomial(&[p])));
        }
        PayoffKind::BestOfCall => {
            if !BESTOF_SIZES.contains(&m) {
                return Err(Error::UnsupportedBasis { case: "bestof", m, supported: "4, 7, 11" });
            }
            for degree in 1..=3u32 {
                for a in (0..=degree).rev() {
                    terms.push(monomial(&[a, degree - a]));
                }
            }
        }
        PayoffKind::BasketCall => {
            if !BASKET_SIZES.contains(&m) {
                return Err(Error::UnsupportedBasis { case: "basket", m, supported: "6, 10, 16" });
            }
            let unit = |j: usize, e: u32| {
                let mut exps = [0u32; 4];
                exps[j] = e;
                monomial(&exps)
            };
            terms.extend((0..4).map(|j| unit(j, 1)));
            terms.extend((0..4).map(|j| unit(j, 2)));
            for a in 0..4 {
                for b in a + 1..4 {
                    let mut exps = [0u32; 4];
                    exps[a] = 1;
                    exps[b] = 1;
                    terms.push(monomial(&exps));
                }
            }
        }
    }
    terms.truncate(m);
    Ok(BasisSpec { case, terms })
}

/// Basis row `X(S)` with `z` the discounted payout at this state and date.
pub fn basis_row(spec: &BasisSpec, state: &[f64], z: f64) -> Vec<f64> {
    let mut row = vec![0.0; spec.len()];
    spec.fill_row(state, z, &mut row);
    row
}
