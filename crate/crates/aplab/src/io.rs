//! File formats and experiment configuration.
//!
//! Set files:   `set <group-descriptor> <cardinality>` then one element
//!              index per line, ascending.
//! GFunc files: `gfunc <group-descriptor> <side>` then `index re im`
//!              triples, ascending by index.
//! Records:     line-oriented JSON, one [`TraceStep`] per line with fields
//!              exactly step, kind, codim_or_rank, k_used, alpha, witness,
//!              bound_ratio, seed.
//!
//! An [`ExperimentConfig`] fully determines a run given the code version;
//! it serializes to JSON and reloads byte-identically.

use crate::density::SubsetG;
use crate::error::{Error, Result};
use crate::grp::Group;
use crate::harmonic::{GFunc, Side};
use crate::increment::TraceStep;
use num_complex::Complex64;
use std::io::{BufRead, Write};

pub fn write_set(out: &mut impl Write, s: &SubsetG) -> Result<()> {
    writeln!(out, "set {} {}", s.group().descriptor(), s.len())?;
    for &m in s.members() {
        writeln!(out, "{m}")?;
    }
    Ok(())
}

pub fn read_set(input: impl BufRead) -> Result<SubsetG> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty set file".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [tag, descriptor, count] = parts.as_slice() else {
        return Err(Error::Parse(format!("bad set header `{header}`")));
    };
    if *tag != "set" {
        return Err(Error::Parse(format!("expected `set` header, got `{tag}`")));
    }
    let group = Group::parse(descriptor)?;
    let count: usize = count
        .parse()
        .map_err(|_| Error::Parse(format!("bad cardinality `{count}`")))?;
    let mut members = Vec::with_capacity(count);
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let idx: u32 = line
            .parse()
            .map_err(|_| Error::Parse(format!("bad element index `{line}`")))?;
        if idx as u64 >= group.order() {
            return Err(Error::Parse(format!("element {idx} out of range")));
        }
        if members.last().is_some_and(|&m| m >= idx) {
            return Err(Error::Parse("set file indices must be strictly ascending".into()));
        }
        members.push(idx);
    }
    if members.len() != count {
        return Err(Error::Parse(format!(
            "cardinality mismatch: header {count}, got {}",
            members.len()
        )));
    }
    SubsetG::new(group, members)
}

fn side_str(side: Side) -> &'static str {
    match side {
        Side::Physical => "physical",
        Side::Fourier => "fourier",
    }
}

pub fn write_gfunc(out: &mut impl Write, f: &GFunc) -> Result<()> {
    writeln!(
        out,
        "gfunc {} {}",
        f.group().descriptor(),
        side_str(f.side())
    )?;
    for (i, v) in f.values().iter().enumerate() {
        writeln!(out, "{i} {:.17e} {:.17e}", v.re, v.im)?;
    }
    Ok(())
}

pub fn read_gfunc(input: impl BufRead) -> Result<GFunc> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty gfunc file".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [tag, descriptor, side] = parts.as_slice() else {
        return Err(Error::Parse(format!("bad gfunc header `{header}`")));
    };
    if *tag != "gfunc" {
        return Err(Error::Parse(format!("expected `gfunc` header, got `{tag}`")));
    }
    let group = Group::parse(descriptor)?;
    let side = match *side {
        "physical" => Side::Physical,
        "fourier" => Side::Fourier,
        other => return Err(Error::Parse(format!("bad side `{other}`"))),
    };
    let mut values = vec![Complex64::new(0.0, 0.0); group.order() as usize];
    let mut next = 0usize;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let [idx, re, im] = cols.as_slice() else {
            return Err(Error::Parse(format!("bad gfunc line `{line}`")));
        };
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::Parse(format!("bad index `{idx}`")))?;
        if idx != next {
            return Err(Error::Parse(format!(
                "gfunc lines must be sorted by index; expected {next}, got {idx}"
            )));
        }
        let re: f64 = re
            .parse()
            .map_err(|_| Error::Parse(format!("bad re `{re}`")))?;
        let im: f64 = im
            .parse()
            .map_err(|_| Error::Parse(format!("bad im `{im}`")))?;
        values[idx] = Complex64::new(re, im);
        next += 1;
    }
    if next != values.len() {
        return Err(Error::Parse(format!(
            "gfunc file has {next} of {} values",
            values.len()
        )));
    }
    GFunc::new(group, side, values)
}

/// One JSON line per record, replayable and diffable.
pub fn write_records(out: &mut impl Write, records: &[TraceStep]) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::Parse(format!("record serialization: {e}")))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn records_to_string(records: &[TraceStep]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("in-memory write");
    String::from_utf8(buf).expect("json is utf8")
}

/// Fully determines a run: group, subcommand parameters, seeds, strategy.
/// Serializes to JSON and reloads byte-identically.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    /// "bootstrap" | "iterate" | "increment-int"
    pub cmd: String,
    /// group descriptor, `v:q:n` or `z:N`
    pub group: String,
    pub eps: f64,
    pub seed: u64,
    /// bootstrap ambient: "ffq" | "bohr"
    pub mode: Option<String>,
    pub instances: Option<u32>,
    pub codim0: Option<u32>,
    pub noise: Option<f64>,
    /// ambient Bohr rank for planted bohr instances
    pub rank: Option<u32>,
    pub max_steps: Option<u32>,
    pub p: Option<u32>,
    pub k: Option<u64>,
    /// "planted" | "randomized" | "exhaustive"
    pub strategy: Option<String>,
    pub trials: Option<u32>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::random_set;

    #[test]
    fn set_round_trip() {
        let g = Group::cyclic(97).unwrap();
        let s = random_set(g, 0.4, 3).unwrap();
        let mut buf = Vec::new();
        write_set(&mut buf, &s).unwrap();
        let back = read_set(&buf[..]).unwrap();
        assert_eq!(back.members(), s.members());
        assert_eq!(back.group(), s.group());
    }

    #[test]
    fn set_rejects_corrupt_input() {
        assert!(read_set("".as_bytes()).is_err());
        assert!(read_set("sept z:7 1\n3\n".as_bytes()).is_err());
        assert!(read_set("set z:7 2\n3\n".as_bytes()).is_err()); // count mismatch
        assert!(read_set("set z:7 1\n9\n".as_bytes()).is_err()); // out of range
        assert!(read_set("set z:7 2\n3\n2\n".as_bytes()).is_err()); // not ascending
        assert!(read_set("set w:7 1\n3\n".as_bytes()).is_err()); // bad descriptor
    }

    #[test]
    fn gfunc_round_trip_exact() {
        let g = Group::vector_space(3, 2).unwrap();
        let mut f = GFunc::zero(g, Side::Physical);
        for x in g.elems() {
            f.values_mut()[x as usize] =
                Complex64::new((x as f64).sin() * 1e3, (x as f64 * 0.1).cos() / 7.0);
        }
        let mut buf = Vec::new();
        write_gfunc(&mut buf, &f).unwrap();
        let back = read_gfunc(&buf[..]).unwrap();
        // 17 significant digits round-trip f64 exactly
        assert_eq!(back.values(), f.values());
        assert_eq!(back.side(), f.side());
    }

    #[test]
    fn config_byte_identical_round_trip() {
        let cfg = ExperimentConfig {
            cmd: "bootstrap".into(),
            group: "v:3:5".into(),
            eps: 0.1,
            seed: 7,
            mode: Some("ffq".into()),
            instances: Some(50),
            codim0: Some(2),
            noise: Some(0.05),
            rank: None,
            max_steps: None,
            p: None,
            k: None,
            strategy: Some("planted".into()),
            trials: None,
        };
        let json = cfg.to_json();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_json(), json, "reserialization is byte-identical");
    }

    #[test]
    fn records_stream_shape() {
        let records = vec![crate::increment::TraceStep {
            step: 0,
            kind: "increment".into(),
            codim_or_rank: 2,
            k_used: 9,
            alpha: 0.117,
            witness: 8.5,
            bound_ratio: 0.3,
            seed: 11,
        }];
        let s = records_to_string(&records);
        assert!(s.starts_with("{\"step\":0,\"kind\":\"increment\",\"codim_or_rank\":2,"));
        assert_eq!(s.lines().count(), 1);
    }
}
