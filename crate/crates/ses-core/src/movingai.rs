//! MovingAI benchmark file formats: `.map` grids and `.scen` scenarios.
//!
//! Map files carry a four-line header (`type octile`, `height H`, `width W`,
//! `map`) followed by `H` rows of terrain characters. `.` and `G` are
//! passable; `@`, `T`, `O` and anything else are treated as blocked.
//! Scenario files are tab-separated; columns 5-8 hold start-x, start-y,
//! goal-x, goal-y.

use crate::grid::{Cell, GridMap};
use crate::solution::AgentTask;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MovingAiError {
    #[error("map header: missing or malformed `{0}` line")]
    Header(&'static str),
    #[error("map body: expected {expected} rows of width {width}, got row {row} of length {got}")]
    BadRow {
        expected: usize,
        width: usize,
        row: usize,
        got: usize,
    },
    #[error("map body: expected {expected} rows, got {got}")]
    MissingRows { expected: usize, got: usize },
    #[error("scenario line {line}: expected at least 8 tab-separated fields")]
    ScenFields { line: usize },
    #[error("scenario line {line}: bad integer: {err}")]
    ScenInt {
        line: usize,
        err: std::num::ParseIntError,
    },
    #[error("scenario is empty")]
    EmptyScenario,
    #[error("scenario line {line}: cell {cell} is out of bounds or blocked")]
    ScenCell { line: usize, cell: Cell },
}

fn header_value<'a>(line: Option<&'a str>, key: &'static str) -> Result<&'a str, MovingAiError> {
    line.and_then(|l| l.strip_prefix(key))
        .map(str::trim)
        .ok_or(MovingAiError::Header(key))
}

pub fn parse_map(text: &str) -> Result<GridMap, MovingAiError> {
    let mut lines = text.lines();
    let first = lines.next().ok_or(MovingAiError::Header("type"))?;
    if !first.starts_with("type") {
        return Err(MovingAiError::Header("type"));
    }
    let height: usize = header_value(lines.next(), "height")?
        .parse()
        .map_err(|_| MovingAiError::Header("height"))?;
    let width: usize = header_value(lines.next(), "width")?
        .parse()
        .map_err(|_| MovingAiError::Header("width"))?;
    match lines.next() {
        Some(l) if l.trim() == "map" => {}
        _ => return Err(MovingAiError::Header("map")),
    }

    let mut blocked = Vec::with_capacity(width * height);
    let mut rows = 0;
    for line in lines.take(height) {
        let row: Vec<char> = line.trim_end().chars().collect();
        if row.len() != width {
            return Err(MovingAiError::BadRow {
                expected: height,
                width,
                row: rows,
                got: row.len(),
            });
        }
        blocked.extend(row.iter().map(|&c| !matches!(c, '.' | 'G')));
        rows += 1;
    }
    if rows != height {
        return Err(MovingAiError::MissingRows {
            expected: height,
            got: rows,
        });
    }
    Ok(GridMap::new(width as u32, height as u32, blocked).expect("parsed dimensions"))
}

pub fn format_map(map: &GridMap) -> String {
    let mut out = format!(
        "type octile\nheight {}\nwidth {}\nmap\n",
        map.height(),
        map.width()
    );
    for y in 0..map.height() {
        for x in 0..map.width() {
            out.push(if map.is_blocked(Cell::new(x, y)) { '@' } else { '.' });
        }
        out.push('\n');
    }
    out
}

/// Parses scenario entries in file order. The caller picks how many to use.
pub fn parse_scen(text: &str, map: &GridMap) -> Result<Vec<AgentTask>, MovingAiError> {
    let mut tasks = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("version") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 8 {
            return Err(MovingAiError::ScenFields { line: lineno + 1 });
        }
        let coord = |idx: usize| -> Result<u32, MovingAiError> {
            fields[idx].trim().parse().map_err(|err| MovingAiError::ScenInt {
                line: lineno + 1,
                err,
            })
        };
        let start = Cell::new(coord(4)?, coord(5)?);
        let goal = Cell::new(coord(6)?, coord(7)?);
        for cell in [start, goal] {
            if !map.in_bounds(cell) || map.is_blocked(cell) {
                return Err(MovingAiError::ScenCell {
                    line: lineno + 1,
                    cell,
                });
            }
        }
        tasks.push(AgentTask {
            agent: tasks.len(),
            start,
            goal,
        });
    }
    if tasks.is_empty() {
        return Err(MovingAiError::EmptyScenario);
    }
    Ok(tasks)
}

pub fn format_scen(map_name: &str, map: &GridMap, tasks: &[AgentTask]) -> String {
    let mut out = String::from("version 1\n");
    for task in tasks {
        out.push_str(&format!(
            "0\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            map_name,
            map.width(),
            map.height(),
            task.start.x,
            task.start.y,
            task.goal.x,
            task.goal.y,
            task.start.manhattan(task.goal)
        ));
    }
    out
}
