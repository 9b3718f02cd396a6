//! Cooperative-profile benchmark: six behavioral-economics games played by
//! scripted or LLM-backed agents, with exact payoff accounting, equilibrium
//! anchored metrics and a small statistical analysis layer.

pub mod games;
pub mod agents;
pub mod engine;
pub mod analysis;
pub mod cli;
