//! Plain-text state snapshots.
//!
//! ```text
//! n N t
//! v opinion        (n lines, v = 0..n)
//! e u v            (N lines, e = 0..N, u < v)
//! ```

use std::fmt::Write as _;

use super::{Bond, NetState, VertexId};
use crate::error::{Error, Result};

impl NetState {
    pub fn to_snapshot(&self) -> String {
        let mut out = String::with_capacity(16 * (self.n + self.edge_count()));
        writeln!(out, "{} {} {}", self.n, self.edge_count(), self.t).unwrap();
        for (v, o) in self.opinions.iter().enumerate() {
            writeln!(out, "{v} {o}").unwrap();
        }
        for (e, b) in self.placement.iter().enumerate() {
            writeln!(out, "{e} {} {}", b.u, b.v).unwrap();
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<NetState> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or(Error::Snapshot {
            line: 1,
            msg: "missing header".into(),
        })?;
        let h = parse_fields::<u64>(hl, header, 3)?;
        let (n, m, t) = (h[0] as usize, h[1] as usize, h[2]);

        let mut opinions = Vec::with_capacity(n);
        for v in 0..n {
            let (ln, l) = next_line(&mut lines, "vertex")?;
            let f = parse_fields::<u64>(ln, l, 2)?;
            if f[0] as usize != v {
                return Err(snap_err(ln, format!("expected vertex {v}, found {}", f[0])));
            }
            if f[1] > 1 {
                return Err(snap_err(ln, format!("opinion must be 0 or 1, found {}", f[1])));
            }
            opinions.push(f[1] as u8);
        }
        let mut bonds = Vec::with_capacity(m);
        for e in 0..m {
            let (ln, l) = next_line(&mut lines, "edge")?;
            let f = parse_fields::<u64>(ln, l, 3)?;
            if f[0] as usize != e {
                return Err(snap_err(ln, format!("expected edge {e}, found {}", f[0])));
            }
            if f[1] as usize >= n || f[2] as usize >= n {
                return Err(snap_err(ln, "endpoint out of range"));
            }
            let b = Bond::new(VertexId(f[1] as u32), VertexId(f[2] as u32))
                .map_err(|_| snap_err(ln, "self-loop"))?;
            bonds.push(b);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(snap_err(ln, "trailing content"));
        }
        let mut state = NetState::from_parts(opinions, bonds)?;
        state.t = t;
        Ok(state)
    }
}

fn snap_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Snapshot {
        line,
        msg: msg.into(),
    }
}

fn next_line<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    what: &str,
) -> Result<(usize, &'a str)> {
    lines
        .next()
        .ok_or_else(|| snap_err(0, format!("unexpected end of input, expected {what} line")))
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str, count: usize) -> Result<Vec<T>> {
    let fields: Vec<T> = text
        .split_whitespace()
        .map(|f| f.parse().map_err(|_| snap_err(line, format!("bad field `{f}`"))))
        .collect::<Result<_>>()?;
    if fields.len() != count {
        return Err(snap_err(line, format!("expected {count} fields, found {}", fields.len())));
    }
    Ok(fields)
}
