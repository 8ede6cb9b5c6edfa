//! Front end for `palais-core`: config ingestion, command orchestration and
//! report emission.
//!
//! Exit codes: 0 pass, 1 negative verdict, 2 input error, 3 numerical failure.

pub mod commands;
pub mod config;

pub use commands::Outcome;
pub use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
    Csv,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("json output") + "\n",
            Format::Table => self.table.clone(),
            Format::Csv => self.csv.clone(),
        }
    }
}
