//! Files, formats, and the command line around [`gest_core`]: JSON
//! (de)serialization, lexicon and embedding loaders, corpus handling,
//! pair scoring, and evaluation reports.

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod json;
pub mod lexicon;
pub mod report;
pub mod table;

pub use gest_core;
