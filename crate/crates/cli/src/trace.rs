//! Text traces: one `<time_ns> <R|W> <hex-addr> [<hex-data>]` per line.

use std::fmt::Write as _;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: u64,
    pub op: Op,
    pub addr: u64,
    pub data: Option<u64>,
}

impl TraceEvent {
    pub fn read(time: u64, addr: u64) -> Self {
        TraceEvent { time, op: Op::Read, addr, data: None }
    }

    pub fn write(time: u64, addr: u64, data: u64) -> Self {
        TraceEvent { time, op: Op::Write, addr, data: Some(data) }
    }
}

fn hex(s: &str) -> Option<u64> {
    let s = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(s, 16).ok()
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>> {
    let mut out: Vec<TraceEvent> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: &str| HarnessError::Parse { line, msg: msg.to_string() };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        let time = f[0].parse::<u64>().map_err(|_| err("bad time"))?;
        let addr = f.get(2).and_then(|s| hex(s)).ok_or_else(|| err("bad or missing address"))?;
        let ev = match (f.get(1).copied(), f.len()) {
            (Some("R" | "r"), 3) => TraceEvent::read(time, addr),
            (Some("W" | "w"), 4) => TraceEvent::write(time, addr, hex(f[3]).ok_or_else(|| err("bad data"))?),
            (Some("R" | "r"), _) => return Err(err("read takes no data")),
            (Some("W" | "w"), _) => return Err(err("write needs data")),
            _ => return Err(err("op must be R or W")),
        };
        if out.last().is_some_and(|p| p.time > time) {
            return Err(err("time goes backwards"));
        }
        out.push(ev);
    }
    Ok(out)
}

pub fn format_trace(events: &[TraceEvent]) -> String {
    let mut s = String::new();
    for e in events {
        match e.data {
            Some(d) => writeln!(s, "{} W {:#x} {:#x}", e.time, e.addr, d),
            None => writeln!(s, "{} R {:#x}", e.time, e.addr),
        }
        .expect("write to string");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_case() {
        let t = parse_trace("# header\n0 r 80000000\n\n5 W 0x80000008 ff # inline\n").unwrap();
        assert_eq!(t, vec![TraceEvent::read(0, 0x8000_0000), TraceEvent::write(5, 0x8000_0008, 0xff)]);
    }

    #[test]
    fn error_lines() {
        let line = |s: &str| match parse_trace(s) {
            Err(HarnessError::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line("0 R 0x80000000\n1 X 0x80000000"), 2);
        assert_eq!(line("#\n\n0 W 0x80000000"), 3);
        assert_eq!(line("5 R 0x80000000\n4 R 0x80000000"), 2);
        assert_eq!(line("zz R 0x80000000"), 1);
        assert_eq!(line("0 R 0x80000000 12"), 1);
    }
}
