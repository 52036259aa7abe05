//! Append-only JSONL session logs and an independent score verifier.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use vistutor_core::Dataset;

use crate::error::{Result, ServiceError};
use crate::session::{Event, Phase};

pub fn log_path(dir: &Path, session_id: &str) -> PathBuf {
    dir.join(format!("{session_id}.jsonl"))
}

/// Appends one event as a single line and flushes it.
pub fn append(path: &Path, event: &Event) -> Result<()> {
    let mut line = serde_json::to_string(event).map_err(|e| ServiceError::Log {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(line.as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn read_events(path: &Path) -> Result<Vec<Event>> {
    let bad = |reason: String| ServiceError::Log {
        path: path.display().to_string(),
        reason,
    };
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line).map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
        events.push(ev);
    }
    Ok(events)
}

/// Recomputes the test accuracy of a finished session from its raw events,
/// checking every logged correctness flag against the dataset labels.
pub fn replay_score(events: &[Event], ds: &Dataset) -> std::result::Result<f64, String> {
    let test_ids = match events.first() {
        Some(Event::Created { test_ids, .. }) => test_ids,
        _ => return Err("log does not start with a created event".into()),
    };
    let mut right = 0usize;
    let mut seen = 0usize;
    for ev in events {
        let Event::Responded {
            phase,
            index,
            item_id,
            choice,
            correct,
            ..
        } = ev
        else {
            continue;
        };
        let pos = ds
            .position(item_id)
            .ok_or_else(|| format!("unknown item '{item_id}'"))?;
        let truth = ds.item(pos).class_index == *choice;
        if truth != *correct {
            return Err(format!("{phase:?}[{index}] logged correct={correct}"));
        }
        if *phase == Phase::Testing {
            if *index != seen || test_ids.get(seen) != Some(item_id) {
                return Err(format!("test response {index} out of sequence"));
            }
            seen += 1;
            right += usize::from(truth);
        }
    }
    if seen != test_ids.len() {
        return Err(format!(
            "{seen} of {} test responses logged",
            test_ids.len()
        ));
    }
    Ok(right as f64 / test_ids.len() as f64)
}
