//! Choosing and building an automaton for a pattern.

use std::fmt;
use std::str::FromStr;

use crate::eager::build_eager;
use crate::error::BuildError;
use crate::lazy::{build_lazy_chain, build_multi_chain, chain_freq_order, merge_chains, NegationStrategy, Rates};
use crate::nfa::Nfa;
use crate::pattern::ChainPattern;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Eager automaton (one per branch, merged).
    Eager,
    /// Single lazy chain, negations checked after all positives.
    Lazy,
    /// Single lazy chain, negations checked as early as possible.
    LazyFc,
    /// One lazy chain per branch, merged.
    Multi,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Eager, Mode::Lazy, Mode::LazyFc, Mode::Multi];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Eager => "eager",
            Mode::Lazy => "lazy",
            Mode::LazyFc => "lazy-fc",
            Mode::Multi => "multi",
        }
    }

    pub fn needs_rates(self) -> bool {
        self != Mode::Eager
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eager" => Ok(Mode::Eager),
            "lazy" | "lazy-pp" => Ok(Mode::Lazy),
            "lazy-fc" => Ok(Mode::LazyFc),
            "multi" => Ok(Mode::Multi),
            other => Err(format!(
                "unknown mode `{other}` (expected eager, lazy, lazy-pp, lazy-fc or multi)"
            )),
        }
    }
}

/// Builds the automaton for normalized branches. Lazy modes need `rates`
/// covering every type of the pattern.
pub fn build_for_mode<S: Scalar>(
    chains: &[ChainPattern<S>],
    mode: Mode,
    rates: Option<&Rates>,
) -> Result<Nfa<S>, BuildError> {
    if chains.is_empty() {
        return Err(BuildError::EmptyChainList);
    }
    let empty = Rates::new();
    let rates = rates.unwrap_or(&empty);
    match mode {
        Mode::Eager => merge_chains(chains.iter().map(build_eager).collect::<Result<_, _>>()?),
        Mode::Lazy | Mode::LazyFc => {
            if chains.len() > 1 {
                return Err(BuildError::NeedsMultiChain(chains.len()));
            }
            let strategy = if mode == Mode::Lazy {
                NegationStrategy::PostProcess
            } else {
                NegationStrategy::FirstChance
            };
            let order = chain_freq_order(&chains[0], rates)?;
            build_lazy_chain(&chains[0], &order, strategy)
        }
        Mode::Multi => build_multi_chain(chains, rates, NegationStrategy::PostProcess),
    }
}
