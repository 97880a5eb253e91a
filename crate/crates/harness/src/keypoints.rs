//! Keypoint files: one `x y` pair per line, `#` starts a comment.

use crate::error::{HarnessError, Result};
use std::fmt::Write as _;
use std::path::Path;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSet {
    pub frame: String,
    pub points: Vec<Point>,
}

impl KeypointSet {
    pub fn new(frame: impl Into<String>, points: Vec<Point>) -> std::result::Result<Self, String> {
        if points.is_empty() {
            return Err("no keypoints".into());
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err("non-finite coordinate".into());
        }
        Ok(Self {
            frame: frame.into(),
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Parses keypoint text; `frame` labels the set. Errors carry 1-based line numbers.
pub fn parse_keypoints(text: &str, frame: &str) -> std::result::Result<KeypointSet, (usize, String)> {
    let mut points = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let [x, y] = tokens[..] else {
            return Err((line, format!("expected `x y`, found {} fields", tokens.len())));
        };
        let parse = |t: &str| -> std::result::Result<f64, (usize, String)> {
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err((line, format!("invalid coordinate {t:?}"))),
            }
        };
        points.push([parse(x)?, parse(y)?]);
    }
    KeypointSet::new(frame, points).map_err(|msg| (last.max(1), msg))
}

pub fn ingest_keypoints(path: &Path) -> Result<KeypointSet> {
    let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
    let frame = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_keypoints(&text, &frame).map_err(|(line, msg)| HarnessError::Input {
        path: path.to_path_buf(),
        line,
        msg,
    })
}

/// Writes points with shortest round-trip formatting, so reading back is exact.
pub fn format_keypoints(set: &KeypointSet) -> String {
    let mut s = String::new();
    for [x, y] in &set.points {
        let _ = writeln!(s, "{x} {y}");
    }
    s
}

pub fn write_keypoints(path: &Path, set: &KeypointSet) -> Result<()> {
    std::fs::write(path, format_keypoints(set)).map_err(HarnessError::io(path))
}
