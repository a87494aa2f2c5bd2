mod closed_loop;
mod eval;
mod fields;
mod pipeline;
mod render;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::cli::Command;
use crate::exit;

pub use closed_loop::{closed_loop, LoopReport, ViewScore};
pub use eval::{evaluate_dirs, EvalSummary, ImageRecord};

pub fn dispatch(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Render(a) => render::run(&a),
        Command::Eval(a) => eval::run(&a),
        Command::Strokes2map(a) => pipeline::strokes2map(&a),
        Command::Superpixels(a) => pipeline::superpixels(&a),
        Command::SamplePairs(a) => pipeline::sample_pairs(&a),
        Command::Aggregate(a) => pipeline::aggregate(&a),
        Command::Gabor(a) => pipeline::gabor(&a),
        Command::Strands2fields(a) => fields::strands2fields(&a),
        Command::Grow(a) => fields::grow(&a),
        Command::SynthWig(a) => fields::synth_wig(&a),
        Command::ClosedLoop(a) => closed_loop::run(&a),
        Command::Serve(a) => crate::service::run(&a),
    }
}

/// Reads JSON lines, skipping blank lines. Errors name the file and line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("cannot read {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| exit::invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush().with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    std::fs::write(path, serde_json::to_vec_pretty(value)?).with_context(|| format!("cannot write {}", path.display()))
}

fn create_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("cannot create directory {}", path.display()))
}
