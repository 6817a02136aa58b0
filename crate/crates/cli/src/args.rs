use std::path::PathBuf;

use clap::{Args, ValueEnum};
use repteach::grid::{GridSpec, Labeling};
use repteach::pools::PoolConfig;
use serde::Serialize;

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunArgs {
    /// Master seed; every random stream of the run is derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if missing; partial outputs are removed on error).
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    /// Independent students and teachers (1000 × 30).
    Unstructured,
    /// 10 clusters of 50 students; 5 of the 10 cluster teachers kept.
    Structured,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PoolArgs {
    #[arg(long, value_enum, default_value_t = PoolKind::Unstructured)]
    pub mode: PoolKind,
    /// Grid side n (n×n stimuli).
    #[arg(long, default_value_t = 6)]
    pub grid_size: usize,
    /// Category structure of the true labels.
    #[arg(long, default_value_t = Labeling::Rows)]
    pub labeling: Labeling,
    /// Students in an unstructured pool.
    #[arg(long, default_value_t = 1000)]
    pub students: usize,
    /// Teachers in an unstructured pool.
    #[arg(long, default_value_t = 30)]
    pub teachers: usize,
}

impl PoolArgs {
    pub fn config(&self, seed: u64) -> anyhow::Result<PoolConfig> {
        let spec = GridSpec::new(self.grid_size, self.labeling)?;
        let cfg = match self.mode {
            PoolKind::Unstructured => PoolConfig {
                n_students: self.students,
                m_teachers: self.teachers,
                ..PoolConfig::unstructured(seed)
            },
            PoolKind::Structured => PoolConfig::structured(seed),
        }
        .with_spec(spec);
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn config_json<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("argument structs serialise")
}
