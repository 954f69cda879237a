//! Line-oriented streaming: a reader feeds fixed-size batches to a worker
//! pool and results are written back in input order, so memory holds at most
//! one batch.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};

use rayon::prelude::*;

use crate::Failure;

/// Lines handed to the pool per worker per batch.
const LINES_PER_WORKER: usize = 64;

pub fn open_input(path: &str) -> Result<Box<dyn BufRead>, Failure> {
    if path == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).map_err(|e| Failure::Data(format!("cannot open {path}: {e}")))?;
    Ok(Box::new(BufReader::new(file)))
}

pub fn open_output(path: &str) -> Result<Box<dyn Write>, Failure> {
    if path == "-" {
        return Ok(Box::new(BufWriter::new(io::stdout())));
    }
    let file = File::create(path).map_err(|e| Failure::Data(format!("cannot create {path}: {e}")))?;
    Ok(Box::new(BufWriter::new(file)))
}

pub fn origin(path: &str) -> &str {
    if path == "-" {
        "<stdin>"
    } else {
        path
    }
}

pub fn write_err(path: &str, e: io::Error) -> Failure {
    // A closed downstream pipe is not worth an error message.
    if e.kind() == io::ErrorKind::BrokenPipe {
        Failure::BrokenPipe
    } else {
        Failure::Data(format!("writing {}: {e}", origin(path)))
    }
}

/// Applies `f` to every nonblank input line and writes the returned lines in
/// input order. `f` receives the 1-based line number. The first failing line
/// (in input order) stops the run.
pub fn process_lines<F>(
    input: &str,
    output: &str,
    pool: &rayon::ThreadPool,
    f: F,
) -> Result<(), Failure>
where
    F: Fn(usize, &str) -> Result<Vec<String>, String> + Sync,
{
    let reader = open_input(input)?;
    let mut out = open_output(output)?;
    let batch_size = LINES_PER_WORKER * pool.current_num_threads();
    let mut batch: Vec<(usize, String)> = Vec::with_capacity(batch_size);
    let mut lines = reader.lines().enumerate();
    loop {
        batch.clear();
        for (i, line) in lines.by_ref() {
            let line = line.map_err(|e| Failure::Data(format!("{}:{}: {e}", origin(input), i + 1)))?;
            if !line.trim().is_empty() {
                batch.push((i + 1, line));
            }
            if batch.len() == batch_size {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        let results: Vec<Result<Vec<String>, String>> = pool.install(|| {
            batch
                .par_iter()
                .map(|(n, line)| f(*n, line).map_err(|e| format!("{}:{n}: {e}", origin(input))))
                .collect()
        });
        for r in results {
            for line in r.map_err(Failure::Data)? {
                out.write_all(line.as_bytes())
                    .and_then(|_| out.write_all(b"\n"))
                    .map_err(|e| write_err(output, e))?;
            }
        }
    }
    out.flush().map_err(|e| write_err(output, e))
}
