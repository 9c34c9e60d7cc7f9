//! Style-imitation harness: author profiles, the four prompting strategies,
//! generation (live endpoint or recorded completions) and scoring of the
//! generated texts against their human sources.

mod generate;
mod profile;
mod prompt;
mod score;

pub use generate::{
    run_batch, BatchOutcome, EndpointConfig, FailureEntry, GenerationRecord, Generator, HttpEndpoint,
    OfflineCompletions, ENDPOINT_TOKEN_ENV,
};
pub use profile::{extract_style_profile, sentences, StyleProfile, PUNCTUATION_MARKS};
pub use prompt::{make_prompt, paragraphs, PromptOptions, Prompt, Strategy, WordRange, SYSTEM_PREAMBLE};
pub use score::{generation_id, score_imitation, ScoredGeneration, ImitationCell, ImitationTable, ScoreOptions};
