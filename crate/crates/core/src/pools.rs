//! Student/teacher populations for classroom matching.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::agents::{TeacherConfig, TeacherKind};
use crate::error::{check_unit, Error, Result};
use crate::grid::{corrupt_representation, GridSpec, Labeling, Representation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolMode {
    Unstructured,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub mode: PoolMode,
    pub spec: GridSpec,
    pub n_students: usize,
    pub m_teachers: usize,
    pub beta_alpha: f64,
    pub beta_beta: f64,
    pub error_low: f64,
    pub error_high: f64,
    pub clusters: usize,
    pub students_per_cluster: usize,
    pub teachers_kept: usize,
    pub within_cluster_corruption: f64,
    pub master_seed: u64,
}

impl PoolConfig {
    /// 1000 students, 30 teachers on a 6×6 row-labeled grid.
    pub fn unstructured(master_seed: u64) -> Self {
        PoolConfig {
            mode: PoolMode::Unstructured,
            spec: GridSpec {
                n: 6,
                labeling: Labeling::Rows,
            },
            n_students: 1000,
            m_teachers: 30,
            beta_alpha: 1.5,
            beta_beta: 2.5,
            error_low: 0.0,
            error_high: 0.5,
            clusters: 10,
            students_per_cluster: 50,
            teachers_kept: 5,
            within_cluster_corruption: 0.01,
            master_seed,
        }
    }

    /// 10 clusters of 50 students, 5 of 10 teachers kept.
    pub fn structured(master_seed: u64) -> Self {
        PoolConfig {
            mode: PoolMode::Structured,
            ..PoolConfig::unstructured(master_seed)
        }
    }

    pub fn with_spec(mut self, spec: GridSpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        check_unit("error_low", self.error_low)?;
        check_unit("error_high", self.error_high)?;
        check_unit("within_cluster_corruption", self.within_cluster_corruption)?;
        if self.error_low > self.error_high {
            return Err(Error::Config("error_low exceeds error_high".into()));
        }
        if !(self.beta_alpha > 0.0 && self.beta_beta > 0.0) {
            return Err(Error::Config("beta parameters must be positive".into()));
        }
        match self.mode {
            PoolMode::Unstructured => {
                if self.n_students == 0 || self.m_teachers == 0 {
                    return Err(Error::Config("student and teacher counts must be positive".into()));
                }
            }
            PoolMode::Structured => {
                if self.clusters == 0 || self.students_per_cluster == 0 || self.teachers_kept == 0 {
                    return Err(Error::Config("cluster counts must be positive".into()));
                }
                if self.teachers_kept > self.clusters {
                    return Err(Error::Config(format!(
                        "teachers_kept ({}) exceeds the number of clusters ({})",
                        self.teachers_kept, self.clusters
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Student {
    pub id: usize,
    pub representation: Representation,
    /// Corruption applied to produce this representation (relative to its parent).
    pub corruption: f64,
    pub cluster: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Teacher {
    pub id: usize,
    pub config: TeacherConfig,
    pub corruption: f64,
    pub cluster: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub seed_corruption: f64,
    pub seed_representation: Representation,
    pub members: Vec<usize>,
    /// Whether this cluster's teacher survived dropout.
    pub has_teacher: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    pub config: PoolConfig,
    pub spec: GridSpec,
    pub students: Vec<Student>,
    pub teachers: Vec<Teacher>,
    pub clusters: Option<Vec<Cluster>>,
}

impl Pool {
    pub fn generate<R: Rng + ?Sized>(cfg: &PoolConfig, rng: &mut R) -> Result<Pool> {
        match cfg.mode {
            PoolMode::Unstructured => generate_unstructured(cfg, rng),
            PoolMode::Structured => generate_structured(cfg, rng),
        }
    }

    pub fn teacher_error_rates(&self) -> Vec<f64> {
        self.teachers.iter().map(|t| t.config.error_rate).collect()
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Independently sampled students and teachers; corruption levels ~ Beta(α, β),
/// teacher error ~ Uniform(error_low, error_high).
pub fn generate_unstructured<R: Rng + ?Sized>(cfg: &PoolConfig, rng: &mut R) -> Result<Pool> {
    cfg.validate()?;
    if cfg.mode != PoolMode::Unstructured {
        return Err(Error::Config("generate_unstructured needs mode = unstructured".into()));
    }
    let beta =
        Beta::new(cfg.beta_alpha, cfg.beta_beta).map_err(|e| Error::Config(format!("beta distribution: {e}")))?;
    let canonical = Representation::identity(cfg.spec.n);
    let students = (0..cfg.n_students)
        .map(|id| {
            let c = beta.sample(rng);
            Ok(Student {
                id,
                representation: corrupt_representation(&canonical, c, rng)?,
                corruption: c,
                cluster: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let teachers = (0..cfg.m_teachers)
        .map(|id| {
            let c = beta.sample(rng);
            let rep = corrupt_representation(&canonical, c, rng)?;
            let err = uniform(rng, cfg.error_low, cfg.error_high);
            Ok(Teacher {
                id,
                config: TeacherConfig::new(rep, err, TeacherKind::SelfCentered)?,
                corruption: c,
                cluster: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pool {
        config: cfg.clone(),
        spec: cfg.spec,
        students,
        teachers,
        clusters: None,
    })
}

/// Clustered population: cluster `m` grows around a seed student at corruption
/// `m / M`; members and the cluster's teacher add a small extra corruption on
/// top of the seed. Teachers are then dropped uniformly until `teachers_kept` remain.
pub fn generate_structured<R: Rng + ?Sized>(cfg: &PoolConfig, rng: &mut R) -> Result<Pool> {
    cfg.validate()?;
    if cfg.mode != PoolMode::Structured {
        return Err(Error::Config("generate_structured needs mode = structured".into()));
    }
    let canonical = Representation::identity(cfg.spec.n);
    let mut students = Vec::with_capacity(cfg.clusters * cfg.students_per_cluster);
    let mut clusters = Vec::with_capacity(cfg.clusters);
    let mut candidates = Vec::with_capacity(cfg.clusters);
    for m in 0..cfg.clusters {
        let seed_corruption = m as f64 / cfg.clusters as f64;
        let seed = corrupt_representation(&canonical, seed_corruption, rng)?;
        let mut members = Vec::with_capacity(cfg.students_per_cluster);
        for _ in 0..cfg.students_per_cluster {
            let id = students.len();
            students.push(Student {
                id,
                representation: corrupt_representation(&seed, cfg.within_cluster_corruption, rng)?,
                corruption: cfg.within_cluster_corruption,
                cluster: Some(m),
            });
            members.push(id);
        }
        let extra = uniform(rng, 0.0, cfg.within_cluster_corruption);
        let rep = corrupt_representation(&seed, extra, rng)?;
        let err = uniform(rng, cfg.error_low, cfg.error_high);
        candidates.push((m, TeacherConfig::new(rep, err, TeacherKind::SelfCentered)?, extra));
        clusters.push(Cluster {
            id: m,
            seed_corruption,
            seed_representation: seed,
            members,
            has_teacher: false,
        });
    }
    let mut kept = index::sample(rng, cfg.clusters, cfg.teachers_kept).into_vec();
    kept.sort_unstable();
    let teachers = kept
        .iter()
        .enumerate()
        .map(|(id, &m)| {
            clusters[m].has_teacher = true;
            let (cluster, config, corruption) = candidates[m].clone();
            Teacher {
                id,
                config,
                corruption,
                cluster: Some(cluster),
            }
        })
        .collect();
    Ok(Pool {
        config: cfg.clone(),
        spec: cfg.spec,
        students,
        teachers,
        clusters: Some(clusters),
    })
}
