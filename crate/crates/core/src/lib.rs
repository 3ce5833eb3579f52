//! Generation in the limit with replayed examples: domains, hypothesis
//! classes, generators, adversaries and a game engine.

pub mod adversaries;
pub mod bits;
pub mod classes;
pub mod domain;
pub mod engine;
pub mod experiment;
pub mod generators;
pub mod proper;
