//! Training, validation and test subsets.
//!
//! Every surface render falls into one *image class* determined by its
//! marking and viewpoint. Training pools are unions of classes over the
//! training function range and are sampled uniformly. Test sets add classes to
//! the Base class and are sampled with equal quotas per class, so a 100-pair
//! test set always contains a meaningful share of the class it probes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::manifest::DatasetManifest;
use super::plan::{JobKind, RenderJob};
use super::tags::{SubsetTag, TestSet, TrainVariant};
use crate::config::{IdRange, SubsetConfig, ViewAngles, GENERIC_VIEW};
use crate::error::{Error, Result};
use crate::render::Pattern;

pub const BASE_SPACING: f64 = 20.0;
pub const TRAIN_LINE_SPACING: f64 = 37.0;
pub const BASELINE_VIEW: ViewAngles = [30.0, 30.0];
pub const TRAIN_GRID_ANGLES: [f64; 2] = [30.0, 60.0];
const OCTANT_STEPS: [f64; 3] = [0.0, 30.0, 60.0];
const BASE_ELEVATION: f64 = 30.0;

/// A surface record paired with its ground-truth depth map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub surface: String,
    pub depth: String,
    pub function_id: u64,
}

impl Pair {
    fn of(job: &RenderJob) -> Self {
        Pair {
            surface: job.path.clone(),
            depth: job.depth_path.clone().expect("surface jobs carry a depth path"),
            function_id: job.function_id,
        }
    }
}

/// Test-side image classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ImageClass {
    /// 20×20 grid, no rotation, φ = 30 octant viewpoint.
    Base,
    /// Other unrotated grid resolutions at Base viewpoints.
    Resolution,
    /// Rotated 20×20 grids at Base viewpoints.
    Angled,
    /// Unrotated line markings at Base viewpoints.
    Lines,
    /// 20×20 grid from a viewpoint outside the octant set.
    NewView,
    /// 20×20 grid from an extreme-elevation octant viewpoint.
    AccidentalView,
    /// Everything else: several effects combined.
    Combined,
}

fn is_octant(v: ViewAngles) -> bool {
    OCTANT_STEPS.contains(&v[0]) && OCTANT_STEPS.contains(&v[1])
}

fn is_base_view(v: ViewAngles) -> bool {
    is_octant(v) && v[1] == BASE_ELEVATION
}

fn is_grid20(job: &RenderJob) -> bool {
    let g = job.grid.as_ref().expect("surface job");
    g.pattern == Pattern::Grid
        && g.spacing_u == BASE_SPACING
        && g.spacing_v == BASE_SPACING
        && g.grid_angle_deg == 0.0
}

pub fn classify(job: &RenderJob) -> ImageClass {
    let g = job.grid.as_ref().expect("surface job");
    let v = job.view_angles().expect("surface job");
    if is_grid20(job) {
        if is_base_view(v) {
            ImageClass::Base
        } else if is_octant(v) {
            ImageClass::AccidentalView
        } else {
            ImageClass::NewView
        }
    } else if !is_base_view(v) {
        ImageClass::Combined
    } else if g.pattern.is_lines() {
        if g.grid_angle_deg == 0.0 {
            ImageClass::Lines
        } else {
            ImageClass::Combined
        }
    } else if g.grid_angle_deg == 0.0 {
        ImageClass::Resolution
    } else if g.spacing_u == BASE_SPACING && g.spacing_v == BASE_SPACING {
        ImageClass::Angled
    } else {
        ImageClass::Combined
    }
}

/// Whether a surface render belongs to a training variant's image pool
/// (function range not considered).
pub fn in_training_pool(job: &RenderJob, variant: TrainVariant) -> bool {
    let g = job.grid.as_ref().expect("surface job");
    let v = job.view_angles().expect("surface job");
    let octant_grid20 = is_grid20(job) && is_octant(v);
    let angled = g.pattern == Pattern::Grid
        && g.spacing_u == BASE_SPACING
        && g.spacing_v == BASE_SPACING
        && TRAIN_GRID_ANGLES.contains(&g.grid_angle_deg)
        && is_octant(v);
    let lines = g.pattern.is_lines()
        && g.spacing_u == TRAIN_LINE_SPACING
        && g.spacing_v == TRAIN_LINE_SPACING
        && g.grid_angle_deg == 0.0
        && is_octant(v);
    match variant {
        TrainVariant::Baseline => is_grid20(job) && v == BASELINE_VIEW,
        TrainVariant::Viewpoints => octant_grid20,
        TrainVariant::AngledGrids => octant_grid20 || angled,
        TrainVariant::Lines => octant_grid20 || lines,
        TrainVariant::Final => octant_grid20 || angled || lines,
    }
}

/// Image classes a test set draws from; Base always comes first.
pub fn test_classes(set: TestSet) -> &'static [ImageClass] {
    use ImageClass::*;
    match set {
        TestSet::Base => &[Base],
        TestSet::Resolutions => &[Base, Resolution],
        TestSet::AngledGrids => &[Base, Angled],
        TestSet::Lines => &[Base, Lines],
        TestSet::Viewpoints => &[Base, NewView],
        TestSet::AccViewpoints => &[Base, AccidentalView],
        TestSet::GeneralGrids => &[Base, Resolution, Angled, Lines],
        TestSet::GeneralViews => &[Base, NewView],
        TestSet::Full => &[Base, Resolution, Angled, Lines, NewView, AccidentalView, Combined],
    }
}

pub fn in_test_pool(job: &RenderJob, set: TestSet) -> bool {
    test_classes(set).contains(&classify(job))
}

fn surfaces_in(jobs: &[RenderJob], range: IdRange) -> impl Iterator<Item = &RenderJob> {
    jobs.iter()
        .filter(move |j| j.kind == JobKind::Surface && range.contains(j.function_id))
}

fn uniform_sample(mut pool: Vec<&RenderJob>, size: usize, seed: u64) -> Result<Vec<Pair>> {
    if pool.len() < size {
        return Err(Error::PoolTooSmall {
            requested: size,
            available: pool.len(),
        });
    }
    pool.sort_by(|a, b| a.path.cmp(&b.path));
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let mut out: Vec<Pair> = pool[..size].iter().map(|j| Pair::of(j)).collect();
    out.sort();
    Ok(out)
}

/// Equal quotas per class; classes that run short hand their quota to the rest.
fn quota_sample(mut classes: Vec<Vec<&RenderJob>>, size: usize, seed: u64) -> Result<Vec<Pair>> {
    let available: usize = classes.iter().map(Vec::len).sum();
    if available < size {
        return Err(Error::PoolTooSmall {
            requested: size,
            available,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for class in &mut classes {
        class.sort_by(|a, b| a.path.cmp(&b.path));
        class.shuffle(&mut rng);
    }
    let mut take = vec![0usize; classes.len()];
    let mut remaining = size;
    while remaining > 0 {
        let open: Vec<usize> = (0..classes.len())
            .filter(|&i| take[i] < classes[i].len())
            .collect();
        let (share, extra) = (remaining / open.len(), remaining % open.len());
        for (n, &i) in open.iter().enumerate() {
            let want = share + usize::from(n < extra);
            let got = want.min(classes[i].len() - take[i]);
            take[i] += got;
            remaining -= got;
        }
    }
    let mut out: Vec<Pair> = classes
        .iter()
        .zip(&take)
        .flat_map(|(c, &n)| c[..n].iter().map(|j| Pair::of(j)))
        .collect();
    out.sort();
    Ok(out)
}

fn training_from_jobs(
    jobs: &[RenderJob],
    range: IdRange,
    variant: TrainVariant,
    size: usize,
    seed: u64,
) -> Result<Vec<Pair>> {
    let pool = surfaces_in(jobs, range)
        .filter(|j| in_training_pool(j, variant))
        .collect();
    uniform_sample(pool, size, seed)
}

fn test_from_jobs(jobs: &[RenderJob], range: IdRange, set: TestSet, size: usize, seed: u64) -> Result<Vec<Pair>> {
    let classes = test_classes(set)
        .iter()
        .map(|&c| surfaces_in(jobs, range).filter(|j| classify(j) == c).collect())
        .collect();
    quota_sample(classes, size, seed)
}

fn splits_of(m: &DatasetManifest) -> Result<&SubsetConfig> {
    m.header
        .splits
        .as_ref()
        .ok_or_else(|| Error::Manifest("manifest has no split ranges".into()))
}

/// Uniformly shuffled sample of a training pool over the training functions.
pub fn make_training_set(
    m: &DatasetManifest,
    variant: TrainVariant,
    size: usize,
    seed: u64,
) -> Result<Vec<Pair>> {
    training_from_jobs(&m.jobs(), splits_of(m)?.train, variant, size, seed)
}

/// Same pool definition as training, drawn from the validation functions.
pub fn make_validation_set(
    m: &DatasetManifest,
    variant: TrainVariant,
    size: usize,
    seed: u64,
) -> Result<Vec<Pair>> {
    training_from_jobs(&m.jobs(), splits_of(m)?.val, variant, size, seed)
}

pub fn make_test_set(m: &DatasetManifest, set: TestSet, size: usize, seed: u64) -> Result<Vec<Pair>> {
    test_from_jobs(&m.jobs(), splits_of(m)?.test, set, size, seed)
}

/// Pairs already tagged with `tag` in the manifest.
pub fn tagged_pairs(m: &DatasetManifest, tag: SubsetTag) -> Vec<Pair> {
    m.records
        .iter()
        .filter(|r| r.job.kind == JobKind::Surface && r.job.tags.contains(&tag))
        .map(|r| Pair::of(&r.job))
        .collect()
}

/// Deterministic per-subset seed derived from the master seed.
pub fn subset_seed(master_seed: u64, tag: SubsetTag) -> u64 {
    let mut h = Sha256::new();
    h.update(b"subset");
    h.update(master_seed.to_le_bytes());
    h.update(tag.to_string().as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Materializes every subset and writes its tag onto the member jobs.
pub(crate) fn assign_tags(jobs: &mut [RenderJob], cfg: &SubsetConfig, master_seed: u64) -> Result<()> {
    let mut members: Vec<(SubsetTag, Vec<Pair>)> = Vec::new();
    for v in TrainVariant::ALL {
        let t = SubsetTag::Train(v);
        members.push((t, training_from_jobs(jobs, cfg.train, v, cfg.train_size, subset_seed(master_seed, t))?));
        let t = SubsetTag::Val(v);
        members.push((t, training_from_jobs(jobs, cfg.val, v, cfg.val_size, subset_seed(master_seed, t))?));
    }
    for s in TestSet::ALL {
        let t = SubsetTag::Test(s);
        members.push((t, test_from_jobs(jobs, cfg.test, s, cfg.test_size, subset_seed(master_seed, t))?));
    }
    // jobs are sorted by path
    for (tag, pairs) in members {
        for p in pairs {
            let k = jobs
                .binary_search_by(|j| j.path.as_str().cmp(&p.surface))
                .expect("sampled pair comes from the job list");
            jobs[k].tags.push(tag);
        }
    }
    for j in jobs.iter_mut() {
        j.tags.sort();
    }
    Ok(())
}

/// Octant viewpoints outside the Base elevation row.
pub fn is_extreme_view(v: ViewAngles) -> bool {
    is_octant(v) && v[1] != BASE_ELEVATION
}

pub fn is_generic_view(v: ViewAngles) -> bool {
    v == GENERIC_VIEW
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Viewpoint;
    use crate::render::GridSpec;

    fn job(path: &str, grid: GridSpec, v: ViewAngles) -> RenderJob {
        RenderJob {
            kind: JobKind::Surface,
            path: path.into(),
            function_id: 0,
            viewpoint: Some(Viewpoint::new(v[0], v[1]).unwrap()),
            grid: Some(grid),
            depth_path: Some("d".into()),
            rule: None,
            tags: vec![],
        }
    }

    #[test]
    fn classification() {
        let g20 = GridSpec::grid(20.0);
        assert_eq!(classify(&job("a", g20, [30.0, 30.0])), ImageClass::Base);
        assert_eq!(classify(&job("a", g20, [60.0, 0.0])), ImageClass::AccidentalView);
        assert_eq!(classify(&job("a", g20, [45.0, 22.5])), ImageClass::NewView);
        assert_eq!(classify(&job("a", GridSpec::grid(28.0), [0.0, 30.0])), ImageClass::Resolution);
        assert_eq!(
            classify(&job("a", g20.with_spacings(20.0, 28.0), [0.0, 30.0])),
            ImageClass::Resolution
        );
        assert_eq!(classify(&job("a", g20.with_angle(50.0), [0.0, 30.0])), ImageClass::Angled);
        assert_eq!(
            classify(&job("a", GridSpec::lines(Pattern::LinesV, 37.0), [60.0, 30.0])),
            ImageClass::Lines
        );
        assert_eq!(classify(&job("a", GridSpec::grid(45.0), [0.0, 0.0])), ImageClass::Combined);
        assert_eq!(classify(&job("a", g20.with_angle(30.0), [0.0, 60.0])), ImageClass::Combined);
    }

    #[test]
    fn quota_redistributes_shortfall() {
        let g = GridSpec::grid(20.0);
        let a: Vec<RenderJob> = (0..10).map(|i| job(&format!("a{i:02}"), g, [30.0, 30.0])).collect();
        let b: Vec<RenderJob> = (0..3).map(|i| job(&format!("b{i:02}"), g, [30.0, 30.0])).collect();
        let out = quota_sample(vec![a.iter().collect(), b.iter().collect()], 8, 1).unwrap();
        assert_eq!(out.len(), 8);
        assert_eq!(out.iter().filter(|p| p.surface.starts_with('b')).count(), 3);
        assert!(matches!(
            quota_sample(vec![a.iter().collect(), b.iter().collect()], 14, 1),
            Err(Error::PoolTooSmall { requested: 14, available: 13 })
        ));
    }

    #[test]
    fn base_pool_is_inside_every_test_pool() {
        for set in TestSet::ALL {
            assert_eq!(test_classes(set)[0], ImageClass::Base);
        }
        let full = test_classes(TestSet::Full);
        for set in TestSet::ALL {
            assert!(test_classes(set).iter().all(|c| full.contains(c)));
        }
    }
}
