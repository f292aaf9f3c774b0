use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

/// One input sample and the path its output should mirror.
#[derive(Debug, Clone)]
pub struct Input {
    pub path: PathBuf,
    pub rel: PathBuf,
}

/// Expands file, directory and list arguments into a sorted sample list.
///
/// A file with one of `exts` is a sample. A directory contributes every
/// matching file below it. Any other file is read as a newline-delimited
/// list of sample paths.
pub fn expand_inputs(args: &[PathBuf], exts: &[&str]) -> Result<Vec<Input>> {
    let mut out = Vec::new();
    for arg in args {
        let meta = fs::metadata(arg).with_context(|| format!("reading {}", arg.display()))?;
        if meta.is_dir() {
            walk(arg, arg, exts, &mut out)?;
        } else if has_ext(arg, exts) {
            out.push(Input { path: arg.clone(), rel: PathBuf::from(arg.file_name().unwrap_or_default()) });
        } else {
            let text = fs::read_to_string(arg).with_context(|| format!("reading {}", arg.display()))?;
            let base = arg.parent().unwrap_or(Path::new(""));
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                let p = Path::new(line);
                let path = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
                let rel = p.components().filter(|c| matches!(c, std::path::Component::Normal(_))).collect();
                out.push(Input { path, rel });
            }
        }
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    out.dedup_by(|a, b| a.path == b.path);
    Ok(out)
}

fn has_ext(p: &Path, exts: &[&str]) -> bool {
    p.extension().and_then(|e| e.to_str()).is_some_and(|e| exts.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

fn walk(root: &Path, dir: &Path, exts: &[&str], out: &mut Vec<Input>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .collect::<std::io::Result<_>>()
        .with_context(|| format!("reading {}", dir.display()))?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            walk(root, &p, exts, out)?;
        } else if has_ext(&p, exts) {
            let rel = p.strip_prefix(root).unwrap_or(&p).to_path_buf();
            out.push(Input { path: p, rel });
        }
    }
    Ok(())
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so the final path never holds a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("writing {}", path.display()))?;
    tmp.write_all(bytes).with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Where per-sample outputs go: one explicit file, or a mirror tree.
pub enum OutputTarget {
    File(PathBuf),
    Dir(PathBuf),
}

impl OutputTarget {
    /// A single sample file argument writes to `out` as a file unless `out`
    /// is an existing directory; everything else mirrors into `out`.
    pub fn new(args: &[PathBuf], inputs: &[Input], out: &Path, exts: &[&str]) -> Self {
        let single = args.len() == 1 && inputs.len() == 1 && args[0].is_file() && has_ext(&args[0], exts);
        if single && !out.is_dir() {
            OutputTarget::File(out.to_path_buf())
        } else {
            OutputTarget::Dir(out.to_path_buf())
        }
    }

    pub fn path_for(&self, input: &Input, ext: &str) -> PathBuf {
        match self {
            OutputTarget::File(p) => p.clone(),
            OutputTarget::Dir(d) => d.join(&input.rel).with_extension(ext),
        }
    }
}

/// Runs `work` over the inputs in parallel chunks and feeds results to
/// `sink` in input order. Only one chunk of results is held at a time.
pub fn process_ordered<T: Send>(
    inputs: &[Input],
    work: impl Fn(&Input) -> Result<T> + Sync,
    mut sink: impl FnMut(&Input, Result<T>) -> Result<()>,
) -> Result<()> {
    let chunk = (rayon::current_num_threads() * 4).clamp(16, 256);
    for c in inputs.chunks(chunk) {
        let results: Vec<Result<T>> = c.par_iter().map(&work).collect();
        for (input, r) in c.iter().zip(results) {
            sink(input, r)?;
        }
    }
    Ok(())
}

/// Counts per-sample failures, logging each one.
#[derive(Debug, Default)]
pub struct Tally {
    pub ok: usize,
    pub failed: usize,
}

impl Tally {
    pub fn record<T>(&mut self, input: &Input, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => {
                self.ok += 1;
                Some(v)
            }
            Err(e) => {
                self.failed += 1;
                log::warn!("{}: {e:#}", input.path.display());
                None
            }
        }
    }

    pub fn require_some(&self) -> Result<()> {
        if self.ok == 0 {
            bail!("no sample succeeded ({} failed)", self.failed);
        }
        Ok(())
    }
}
