use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use super::cell::{run_cell, RunSettings, SweepData, SweepResult};
use super::grid::{GridCell, SweepGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
    /// JSON-lines file receiving one result per finished cell.
    pub journal: Option<PathBuf>,
    /// Skip cells already present in the journal.
    pub resume: bool,
    /// Stop after this many newly run cells.
    pub cell_limit: Option<usize>,
    /// Print one line per finished cell to stderr.
    pub verbose: bool,
}

/// Reads a journal, ignoring an unparsable final line left by an interrupted
/// write. Returns the results, the byte length of the valid prefix and
/// whether that prefix ends with a newline.
fn read_journal_prefix(path: &Path) -> Result<(Vec<SweepResult>, u64, bool)> {
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    let mut reader = BufReader::new(file);
    let mut results = Vec::new();
    let mut valid = 0u64;
    let mut terminated = true;
    let mut line = String::new();
    for number in 1.. {
        line.clear();
        let n = reader.read_line(&mut line).map_err(|e| Error::from(e).in_file(path))?;
        if n == 0 {
            break;
        }
        let last = !line.ends_with('\n');
        if !line.trim().is_empty() {
            match serde_json::from_str::<SweepResult>(line.trim()) {
                Ok(r) => results.push(r),
                Err(_) if last => break,
                Err(e) => {
                    return Err(Error::Parse {
                        line: number,
                        message: e.to_string(),
                    }
                    .in_file(path))
                }
            }
        }
        valid += n as u64;
        terminated = !last;
    }
    Ok((results, valid, terminated))
}

/// All complete results recorded in a journal file.
pub fn read_journal(path: impl AsRef<Path>) -> Result<Vec<SweepResult>> {
    Ok(read_journal_prefix(path.as_ref())?.0)
}

fn open_journal(path: &Path, resume: bool) -> Result<(File, Vec<SweepResult>)> {
    let wrap = |e: std::io::Error| Error::from(e).in_file(path);
    if resume && path.exists() {
        let (done, valid, terminated) = read_journal_prefix(path)?;
        let file = OpenOptions::new().write(true).open(path).map_err(wrap)?;
        file.set_len(valid).map_err(wrap)?;
        let mut file = OpenOptions::new().append(true).open(path).map_err(wrap)?;
        if !terminated {
            file.write_all(b"\n").map_err(wrap)?;
        }
        return Ok((file, done));
    }
    if path.exists() && std::fs::metadata(path).map_err(wrap)?.len() > 0 {
        return Err(Error::Config(format!(
            "journal {} already exists; pass --resume to continue it",
            path.display()
        )));
    }
    Ok((File::create(path).map_err(wrap)?, Vec::new()))
}

/// Runs every cell of the grid on a fixed-size worker pool.
///
/// Results come back in grid order regardless of scheduling. With a journal,
/// each result is appended as soon as its cell finishes, and `resume` reuses
/// journaled results instead of rerunning those cells.
pub fn run_sweep(
    grid: &SweepGrid,
    data: &SweepData,
    settings: &RunSettings,
    options: &SweepOptions,
) -> Result<Vec<SweepResult>> {
    grid.validate()?;
    settings.training.validate()?;
    let cells = grid.cells();

    let (mut journal, previous) = match &options.journal {
        Some(path) => {
            let (file, done) = open_journal(path, options.resume)?;
            (Some(file), done)
        }
        None => (None, Vec::new()),
    };
    let wanted: HashSet<&GridCell> = cells.iter().collect();
    let mut finished: HashMap<GridCell, SweepResult> = previous
        .into_iter()
        .map(|r| (r.cell(), r))
        .filter(|(c, _)| wanted.contains(c))
        .collect();

    let mut pending: Vec<&GridCell> = cells.iter().filter(|c| !finished.contains_key(*c)).collect();
    if let Some(limit) = options.cell_limit {
        pending.truncate(limit);
    }

    let workers = match options.workers {
        0 => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        n => n,
    }
    .min(pending.len().max(1));

    let next = AtomicUsize::new(0);
    let total = pending.len();
    let write_result: Result<()> = std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<SweepResult>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, pending) = (&next, &pending);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = pending.get(i) else { break };
                if tx.send(run_cell(cell, data, settings)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut done = 0;
        for result in rx {
            done += 1;
            if let Some(file) = journal.as_mut() {
                let mut line = serde_json::to_string(&result)?;
                line.push('\n');
                file.write_all(line.as_bytes())?;
                file.flush()?;
            }
            if options.verbose {
                eprintln!("[{done}/{total}] {} {:?}", result.cell(), result.status);
            }
            finished.insert(result.cell(), result);
        }
        Ok(())
    });
    write_result?;

    Ok(cells.iter().filter_map(|c| finished.remove(c)).collect())
}
