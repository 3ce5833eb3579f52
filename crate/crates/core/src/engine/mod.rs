//! Plays games to a horizon, checks replay legality, and scores transcripts.

mod game;
mod scoring;
mod transcript;

pub use game::{
    run_game, run_game_observed, run_proper_game, run_proper_game_observed, EngineError, GameRun,
    ProperRun, ProperTarget, ProperTargetReport, TargetSelection,
};
pub use scoring::{
    check_enumeration_with_replay, check_proper_enumeration, improper_mistakes, score_proper,
    score_transcript, score_transcript_with, tail_start, validate_proper_stream, validate_step,
    validate_stream, Classification, Notion, Verdict, DEFAULT_QUIET_TAIL,
};
pub use transcript::{LegalityTag, Output, RoundRecord, RunMeta, TargetRecord, Transcript, SCHEMA};
