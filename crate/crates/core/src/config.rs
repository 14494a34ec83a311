//! Plain-text run configuration: `[section]` headers followed by
//! `key = value` lines; `#` starts a comment.
//!
//! ```text
//! [scenario]
//! name = seeded-segment
//! [shape]
//! delta = 0.2
//! [numerics]
//! dt = 0.02
//! h_quad = 1/128
//! ```
//!
//! Keys not given keep the scenario's preset value. Numbers may be written
//! as fractions `p/q`. `core_radius = auto` selects twice the blob spacing.

use crate::error::{Error, Result};
use crate::scenario::{ScenarioConfig, ScenarioKind};
use std::fmt::Write as _;

const SECTIONS: [(&str, &[&str]); 5] = [
    ("scenario", &["name"]),
    (
        "shape",
        &[
            "a",
            "b",
            "match_volume",
            "delta",
            "m_peak",
            "r0",
            "sigma",
            "seeded",
        ],
    ),
    (
        "numerics",
        &[
            "dt",
            "t_end",
            "h_min",
            "h_max",
            "h_quad",
            "curvature_budget",
            "arc_nodes",
            "blob_spacing",
            "core_radius",
        ],
    ),
    ("output", &["out", "snapshot_every", "diag_every", "energy"]),
    ("trace", &["margin"]),
];

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

pub fn parse_f64(s: &str) -> Result<f64> {
    let parsed = match s.split_once('/') {
        Some((p, q)) => match (p.trim().parse::<f64>(), q.trim().parse::<f64>()) {
            (Ok(p), Ok(q)) if q != 0.0 => Ok(p / q),
            _ => Err(()),
        },
        None => s.parse::<f64>().map_err(|_| ()),
    };
    match parsed {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Config(format!("'{s}' is not a finite number"))),
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!("'{s}' is not true or false"))),
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Config(format!("'{s}' is not a nonnegative integer")))
}

/// Sets one key, with `key` as written in the file.
pub fn set_key(cfg: &mut ScenarioConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "name" => cfg.scenario = value.parse()?,
        "a" => cfg.a = parse_f64(value)?,
        "b" => cfg.b = parse_f64(value)?,
        "match_volume" => cfg.match_volume = parse_bool(value)?,
        "delta" => cfg.delta = parse_f64(value)?,
        "m_peak" => cfg.m_peak = parse_f64(value)?,
        "r0" => cfg.r0 = parse_f64(value)?,
        "sigma" => cfg.sigma = parse_f64(value)?,
        "seeded" => cfg.seeded = parse_bool(value)?,
        "dt" => cfg.dt = parse_f64(value)?,
        "t_end" => cfg.t_end = parse_f64(value)?,
        "h_min" => cfg.h_min = parse_f64(value)?,
        "h_max" => cfg.h_max = parse_f64(value)?,
        "h_quad" => cfg.h_quad = parse_f64(value)?,
        "curvature_budget" => cfg.curvature_budget = parse_f64(value)?,
        "arc_nodes" => cfg.arc_nodes = parse_usize(value)?,
        "blob_spacing" => cfg.blob_spacing = parse_f64(value)?,
        "core_radius" => {
            cfg.core_radius = if value == "auto" {
                None
            } else {
                Some(parse_f64(value)?)
            }
        }
        "out" => {
            if value.is_empty() {
                return Err(Error::Config("out must not be empty".into()));
            }
            cfg.out = value.to_string()
        }
        "snapshot_every" => cfg.snapshot_every = parse_usize(value)?,
        "diag_every" => cfg.diag_every = parse_usize(value)?,
        "energy" => cfg.energy = parse_bool(value)?,
        "margin" => cfg.margin = parse_f64(value)?,
        _ => return Err(Error::Config(format!("unknown key '{key}'"))),
    }
    Ok(())
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

fn entries(text: &str) -> Result<Vec<Entry<'_>>> {
    let mut section: Option<&str> = None;
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line, "unterminated section header"))?
                .trim();
            if !SECTIONS.iter().any(|(n, _)| *n == name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            section = Some(name);
            continue;
        }
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key = value, got '{s}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.ok_or_else(|| err(line, "key outside of a section"))?;
        let allowed = SECTIONS
            .iter()
            .find(|(n, _)| *n == sec)
            .map(|(_, k)| *k)
            .unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(err(line, format!("unknown key '{key}' in [{sec}]")));
        }
        out.push(Entry { line, key, value });
    }
    Ok(out)
}

/// Parses a configuration, starting from the preset of the named scenario
/// (hill when no name is given).
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_config_with(text, None)
}

/// As [`parse_config`], but a given `scenario` replaces the file's name
/// (so its preset supplies the defaults).
pub fn parse_config_with(text: &str, scenario: Option<ScenarioKind>) -> Result<ScenarioConfig> {
    let es = entries(text)?;
    let mut kind = ScenarioKind::Hill;
    for e in es.iter().filter(|e| e.key == "name") {
        kind = e
            .value
            .parse()
            .map_err(|x: Error| err(e.line, x.to_string()))?;
    }
    let mut cfg = ScenarioConfig::preset(scenario.unwrap_or(kind));
    for e in es.iter().filter(|e| e.key != "name") {
        set_key(&mut cfg, e.key, e.value).map_err(|x| err(e.line, x.to_string()))?;
    }
    Ok(cfg)
}

/// Writes every field; `parse_config(&serialize_config(c)) == c`.
pub fn serialize_config(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    let core = match cfg.core_radius {
        Some(c) => c.to_string(),
        None => "auto".to_string(),
    };
    let _ = writeln!(s, "[scenario]\nname = {}", cfg.scenario);
    let _ = writeln!(
        s,
        "[shape]\na = {}\nb = {}\nmatch_volume = {}\ndelta = {}\nm_peak = {}\nr0 = {}\nsigma = {}\nseeded = {}",
        cfg.a, cfg.b, cfg.match_volume, cfg.delta, cfg.m_peak, cfg.r0, cfg.sigma, cfg.seeded
    );
    let _ = writeln!(
        s,
        "[numerics]\ndt = {}\nt_end = {}\nh_min = {}\nh_max = {}\nh_quad = {}\ncurvature_budget = {}\narc_nodes = {}\nblob_spacing = {}\ncore_radius = {}",
        cfg.dt, cfg.t_end, cfg.h_min, cfg.h_max, cfg.h_quad, cfg.curvature_budget, cfg.arc_nodes, cfg.blob_spacing, core
    );
    let _ = writeln!(
        s,
        "[output]\nout = {}\nsnapshot_every = {}\ndiag_every = {}\nenergy = {}",
        cfg.out, cfg.snapshot_every, cfg.diag_every, cfg.energy
    );
    let _ = writeln!(s, "[trace]\nmargin = {}", cfg.margin);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn partial_file_uses_preset() {
        let cfg = parse_config("[scenario]\nname = prolate\n[numerics]\nh_quad = 1/64 # coarse\n")
            .unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::Prolate);
        assert_eq!(cfg.a, 0.9);
        assert_eq!(cfg.h_quad, 1.0 / 64.0);
        let over = parse_config_with(
            "[scenario]\nname = prolate\n[shape]\ndelta = 0.3\n",
            Some(ScenarioKind::Oblate),
        )
        .unwrap();
        assert_eq!(
            (over.scenario, over.a, over.delta),
            (ScenarioKind::Oblate, 1.1, 0.3)
        );
    }

    #[test]
    fn malformed_input() {
        for bad in [
            "dt = 0.1",
            "[numerics]\ndt 0.1",
            "[numerics]\ndt = fast",
            "[numerics]\nwidth = 3",
            "[shape]\ndt = 0.1",
            "[nowhere]",
            "[scenario]\nname = sphere",
            "[numerics\n",
            "[numerics]\ndt = 1/0",
        ] {
            assert!(matches!(parse_config(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn presets_round_trip() {
        for k in ScenarioKind::ALL {
            let c = ScenarioConfig::preset(k);
            assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
        }
    }

    fn kind() -> impl Strategy<Value = ScenarioKind> {
        (0..6usize).prop_map(|i| ScenarioKind::ALL[i])
    }

    fn pos() -> impl Strategy<Value = f64> {
        1e-6..1e3f64
    }

    proptest! {
        #[test]
        fn round_trip(
            k in kind(),
            shape in (pos(), pos(), any::<bool>(), pos(), pos(), pos(), pos(), any::<bool>()),
            num in (pos(), 0.0..100.0f64, pos(), pos(), pos(), pos(), 0..10_000usize, pos()),
            core in proptest::option::of(pos()),
            out in "[a-z0-9_/.-]{1,20}",
            strides in (1..1000usize, 1..1000usize, any::<bool>(), pos()),
        ) {
            let mut c = ScenarioConfig::preset(k);
            (c.a, c.b, c.match_volume, c.delta, c.m_peak, c.r0, c.sigma, c.seeded) = shape;
            (c.dt, c.t_end, c.h_min, c.h_max, c.h_quad, c.curvature_budget, c.arc_nodes, c.blob_spacing) = num;
            c.core_radius = core;
            c.out = out;
            (c.snapshot_every, c.diag_every, c.energy, c.margin) = strides;
            prop_assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
        }
    }
}
