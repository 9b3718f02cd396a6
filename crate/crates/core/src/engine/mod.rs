//! Simulation runner: prompts, reply parsing, round loop and batch execution.

mod batch;
mod config;
mod parse;
mod prompts;
mod simulation;
mod transcript;

pub use batch::{run_batch, run_batch_streaming, AgentFactory, BatchError, SpecFactory};
pub use config::{
    PromptStrategy, PromptVariant, SimulationConfig, StrategyTexts, DEFAULT_COT_INSTRUCTION, DEFAULT_TOM_INSTRUCTION,
};
pub use parse::{extract_json_object, parse_decision, parse_sanctions, ParseError};
pub use prompts::{
    build_decision_prompt, build_deliberation_prompt, build_sanction_prompt, build_system_prompt, game_description,
    retry_message, round_summary, schema_example, PromptError, PromptState, SANCTION_SCHEMA,
};
pub use simulation::{run_simulation, stream_rng};
pub use transcript::{
    DeliberationMessage, Phase, QueryRecord, RoundRecord, SimulationStatus, TokenUsage, Transcript,
    TranscriptDecodeError, SCHEMA_VERSION,
};
