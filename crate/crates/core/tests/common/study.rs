//! End-to-end toy study: cohort, pair selection, morph generation through the
//! job protocol, scoring and MMPMR for selected versus random pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use morphlab_core::backend::{toy, toy_cohort, random_pairs, ToyBackend, ToyWorld};
use morphlab_core::model::{MetaTable, MorphPair};
use morphlab_core::pairs::{partition_by_metadata, select_top_pairs};
use morphlab_core::pipeline::{run_morph_pipeline, MorphOutcome, PipelineConfig};
use morphlab_core::vulnerability::{fmr_threshold, mmpmr};

pub struct StudyOutcome {
    pub selected_mmpmr: f64,
    pub random_mmpmr: f64,
    pub threshold: f64,
    pub selected_pairs: usize,
    pub random_pairs: usize,
    /// Every file written under the study directory, by relative path.
    pub artifacts: BTreeMap<PathBuf, Vec<u8>>,
}

fn collect(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect(root, &p, out);
        } else {
            out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
        }
    }
}

pub fn run_study(dir: &Path, subjects: usize, pairs_per_split: usize, seed: u64) -> StudyOutcome {
    let world = ToyWorld::with_seed(seed).unwrap();
    let cohort = toy_cohort(&world, subjects, 2, seed.wrapping_add(1)).unwrap();

    let mut images = BTreeMap::new();
    for img in &cohort.sources {
        let path = dir.join("images").join(format!("{}.vec", img.id));
        toy::write_image(&path, &img.id, img.values.clone()).unwrap();
        images.insert(img.id.clone(), path);
    }

    let embeddings = cohort.source_embeddings(&world).unwrap();
    let meta = MetaTable::new(cohort.meta.clone()).unwrap();
    let splits = partition_by_metadata(&embeddings, &meta).unwrap();
    let mut selected: Vec<MorphPair> = Vec::new();
    let mut random: Vec<MorphPair> = Vec::new();
    for (i, (_, split)) in splits.iter().enumerate() {
        let top = select_top_pairs(split, pairs_per_split).unwrap();
        random.extend(random_pairs(split, pairs_per_split, &top, seed.wrapping_add(10 + i as u64)).unwrap());
        selected.extend(top);
    }

    let backend = ToyBackend::new(world.clone());
    let config = PipelineConfig {
        lambda: Some(0.5),
        seed,
        ..Default::default()
    };
    let nonmated = cohort.nonmated_scores(&world).unwrap();
    let threshold = fmr_threshold(&nonmated, 0.01).unwrap().threshold;

    let rate = |name: &str, pairs: &[MorphPair]| {
        let job = dir.join(name);
        let records = run_morph_pipeline(pairs, &images, &backend, &config, &job).unwrap();
        let morphs: Vec<_> = records
            .into_iter()
            .map(|r| match r.outcome {
                MorphOutcome::Ok { image, .. } => {
                    (r.morph_id, r.pair, toy::read_image(&job.join(image)).unwrap())
                }
                MorphOutcome::Failed { reason } => panic!("morph {} failed: {reason}", r.morph_id),
            })
            .collect();
        mmpmr(&cohort.mated_scores(&world, &morphs).unwrap(), threshold)
    };
    let selected_mmpmr = rate("selected", &selected);
    let random_mmpmr = rate("random", &random);

    let mut artifacts = BTreeMap::new();
    collect(dir, dir, &mut artifacts);
    StudyOutcome {
        selected_mmpmr,
        random_mmpmr,
        threshold,
        selected_pairs: selected.len(),
        random_pairs: random.len(),
        artifacts,
    }
}
