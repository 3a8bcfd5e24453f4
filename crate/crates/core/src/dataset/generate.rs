//! Corpus generation. Each sequence draws its own pelvis and workflow from
//! generators keyed by its index, so the bytes on disk do not depend on the
//! number of workers or the order they finish in.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use super::io::{anatomy_file_name, sequence_file_name, write_manifest, write_sequence, Manifest, ManifestEntry, CONFIG_FILE};
use super::record::FrameRecord;
use crate::anatomy::{synth_pelvis, AnatomySpec};
use crate::error::{CorpusError, DatasetError};
use crate::rng::{sequence_seed, stream_rng, ANATOMY_STREAM};
use crate::simulation::{run_sequence, SimConfig};

#[derive(Debug, Clone)]
pub struct GeneratedSequence {
    pub sequence_id: u64,
    pub seed: u64,
    pub anatomy: AnatomySpec,
    pub records: Vec<FrameRecord>,
}

/// Sequence `index` of the corpus rooted at `master_seed`.
pub fn generate_sequence(
    config: &Arc<SimConfig>,
    template: &AnatomySpec,
    master_seed: u64,
    index: u64,
) -> Result<GeneratedSequence, CorpusError> {
    let seed = sequence_seed(master_seed, index);
    let anatomy = synth_pelvis(&mut stream_rng(seed, ANATOMY_STREAM), template, &config.anatomy)
        .map_err(crate::error::SimError::from)?;
    let shared = Arc::new(anatomy);
    let records = run_sequence(index, seed, shared.clone(), config.clone())?;
    Ok(GeneratedSequence {
        sequence_id: index,
        seed,
        anatomy: Arc::unwrap_or_clone(shared),
        records,
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CorpusError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CorpusError::Workers(e.to_string()))
}

/// Generates `count` sequences in memory, in index order.
pub fn generate(
    config: &SimConfig,
    master_seed: u64,
    count: u64,
    workers: usize,
) -> Result<Vec<GeneratedSequence>, CorpusError> {
    config.validate()?;
    let config = Arc::new(config.clone());
    let template = AnatomySpec::template();
    pool(workers)?.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| generate_sequence(&config, &template, master_seed, i))
            .collect()
    })
}

/// Simulates and writes a corpus under `root`, which must be empty or
/// absent. Sequences are written as they finish; the manifest goes last.
pub fn simulate_corpus(
    root: &Path,
    config: &SimConfig,
    master_seed: u64,
    count: u64,
    workers: usize,
) -> Result<Manifest, CorpusError> {
    config.validate()?;
    let io_error = |source| DatasetError::Io {
        path: root.to_path_buf(),
        source,
    };
    if root.exists() && fs::read_dir(root).map_err(io_error)?.next().is_some() {
        return Err(CorpusError::NotEmpty(root.to_path_buf()));
    }
    fs::create_dir_all(root).map_err(io_error)?;
    let config_path = root.join(CONFIG_FILE);
    fs::write(&config_path, config.to_toml_string()).map_err(|source| DatasetError::Io {
        path: config_path,
        source,
    })?;

    let shared = Arc::new(config.clone());
    let template = AnatomySpec::template();
    let entries: Vec<ManifestEntry> = pool(workers)?.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let s = generate_sequence(&shared, &template, master_seed, i)?;
                let anatomy_file = anatomy_file_name(i);
                let anatomy_path = root.join(&anatomy_file);
                if let Some(dir) = anatomy_path.parent() {
                    fs::create_dir_all(dir).map_err(|source| DatasetError::Io {
                        path: dir.to_path_buf(),
                        source,
                    })?;
                }
                fs::write(&anatomy_path, s.anatomy.to_json() + "\n").map_err(|source| {
                    DatasetError::Io {
                        path: anatomy_path.clone(),
                        source,
                    }
                })?;
                let file = sequence_file_name(i);
                write_sequence(&s.records, &root.join(&file))?;
                Ok(ManifestEntry {
                    sequence_id: i,
                    seed: s.seed,
                    file,
                    anatomy_file,
                    frames: s.records.len(),
                })
            })
            .collect::<Result<_, CorpusError>>()
    })?;

    let mut manifest = Manifest::new(config.hash(), master_seed);
    manifest.sequences = entries;
    write_manifest(&manifest, root)?;
    Ok(manifest)
}
