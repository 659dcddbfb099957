//! Non-malleable reductions and their simulators.

pub mod chain;
pub mod leaky;
pub mod splitstate;
pub mod star;

pub use chain::StarChain;
pub use leaky::{eval_leaky, LeakyAdversary, Selection, Selector, Tampering, Transcript};
pub use splitstate::{AdversaryBudget, BadEvent, Hybrid, Replay, SplitStateParams, SplitStateSim, SsCoins, SsOutcome, Stage};
pub use star::{DecodeRule, StarParams, StarRandomness};
