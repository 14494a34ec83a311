//! Snapshot files and observers that write or collect them.
//!
//! A patch snapshot holds one block per contour:
//!
//! ```text
//! # t=<time> nodes=<N> closed=<0|1>
//! r,z
//! ...
//! ```
//!
//! A blob snapshot holds a single block `# t=<time> blobs=<N> core=<δ>`
//! followed by `r,z,xi,volume` lines. Numbers carry 17 significant digits.

use crate::biot_savart::{Blob, BlobField, VorticitySource};
use crate::error::{Error, Result};
use crate::evolution::{Observer, State};
use crate::flow_map::{Interpolation, VelocityHistory};
use crate::geometry::{Contour, HalfPlanePoint};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

pub fn write_contour(out: &mut String, t: f64, c: &Contour) {
    let _ = writeln!(
        out,
        "# t={t} nodes={} closed={}",
        c.len(),
        u8::from(c.is_closed())
    );
    for p in c.nodes() {
        let _ = writeln!(out, "{:.16e},{:.16e}", p.r, p.z);
    }
}

/// Text of a snapshot of `state`.
pub fn snapshot_text(state: &State) -> String {
    let mut s = String::new();
    match state {
        State::Patch(p) => {
            for c in &p.contours {
                write_contour(&mut s, p.t, c);
            }
        }
        State::Blobs(b) => {
            let _ = writeln!(
                s,
                "# t={} blobs={} core={}",
                b.t,
                b.field.blobs.len(),
                b.field.core_radius
            );
            for q in &b.field.blobs {
                let _ = writeln!(
                    s,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    q.p.r, q.p.z, q.xi, q.volume
                );
            }
        }
    }
    s
}

/// Parsed snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Patch { t: f64, contours: Vec<Contour> },
    Blobs { t: f64, blobs: Vec<Blob>, core: f64 },
}

impl Snapshot {
    pub fn t(&self) -> f64 {
        match self {
            Snapshot::Patch { t, .. } | Snapshot::Blobs { t, .. } => *t,
        }
    }

    /// Vorticity source; patches use strength `xi_value` and raster `h_quad`.
    pub fn source(&self, xi_value: f64, h_quad: f64) -> Result<VorticitySource> {
        match self {
            Snapshot::Patch { contours, .. } => {
                VorticitySource::patch(contours.clone(), xi_value, h_quad)
            }
            Snapshot::Blobs { blobs, core, .. } => Ok(VorticitySource::Blobs(BlobField::new(
                blobs.clone(),
                *core,
            )?)),
        }
    }
}

fn header_fields(line: &str) -> Result<Vec<(&str, &str)>> {
    line.trim_start_matches('#')
        .split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad snapshot header field '{kv}'")))
        })
        .collect()
}

fn num(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("'{s}' is not a number")))
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let first = lines
        .peek()
        .copied()
        .ok_or_else(|| Error::Parse("empty snapshot".into()))?;
    let fields = header_fields(first)?;
    let get = |f: &[(&str, &str)], k: &str| -> Result<String> {
        f.iter()
            .find(|(a, _)| *a == k)
            .map(|(_, v)| v.to_string())
            .ok_or_else(|| Error::Parse(format!("snapshot header lacks '{k}'")))
    };
    if fields.iter().any(|(k, _)| *k == "blobs") {
        lines.next();
        let t = num(&get(&fields, "t")?)?;
        let n: usize = get(&fields, "blobs")?
            .parse()
            .map_err(|_| Error::Parse("bad blob count".into()))?;
        let core = num(&get(&fields, "core")?)?;
        let blobs = lines
            .map(|l| {
                let v: Vec<f64> = l.split(',').map(num).collect::<Result<_>>()?;
                if v.len() != 4 {
                    return Err(Error::Parse(format!("blob line needs 4 fields: '{l}'")));
                }
                Ok(Blob::new(HalfPlanePoint::new(v[0], v[1]), v[2], v[3]))
            })
            .collect::<Result<Vec<_>>>()?;
        if blobs.len() != n {
            return Err(Error::Parse(format!(
                "expected {n} blobs, found {}",
                blobs.len()
            )));
        }
        return Ok(Snapshot::Blobs { t, blobs, core });
    }
    let mut contours = Vec::new();
    let mut t = f64::NAN;
    while let Some(h) = lines.next() {
        if !h.starts_with('#') {
            return Err(Error::Parse(format!(
                "expected a contour header, got '{h}'"
            )));
        }
        let f = header_fields(h)?;
        t = num(&get(&f, "t")?)?;
        let n: usize = get(&f, "nodes")?
            .parse()
            .map_err(|_| Error::Parse("bad node count".into()))?;
        let closed = get(&f, "closed")? == "1";
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let l = lines
                .next()
                .ok_or_else(|| Error::Parse("snapshot ends inside a contour".into()))?;
            let (r, z) = l
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("node line needs r,z: '{l}'")))?;
            nodes.push(HalfPlanePoint::new(num(r)?, num(z)?));
        }
        contours.push(if closed {
            Contour::closed(nodes)
        } else {
            Contour::open(nodes)
        });
    }
    Ok(Snapshot::Patch { t, contours })
}

/// Forwards every `n`-th step to the inner observer, and the final state.
pub struct Every<O> {
    pub n: usize,
    pub inner: O,
    last_seen: Option<usize>,
    last_sent: Option<usize>,
}

impl<O: Observer> Every<O> {
    pub fn new(n: usize, inner: O) -> Self {
        Self {
            n: n.max(1),
            inner,
            last_seen: None,
            last_sent: None,
        }
    }
}

impl<O: Observer> Observer for Every<O> {
    fn observe(&mut self, state: &State, step: usize) -> Result<()> {
        self.last_seen = Some(step);
        if step.is_multiple_of(self.n) {
            self.last_sent = Some(step);
            self.inner.observe(state, step)?;
        }
        Ok(())
    }

    fn finish(&mut self, state: &State) -> Result<()> {
        if let Some(step) = self.last_seen {
            if self.last_sent != Some(step) {
                self.last_sent = Some(step);
                self.inner.observe(state, step)?;
            }
        }
        self.inner.finish(state)
    }
}

/// Writes `step_<k>.csv` files into a directory.
pub struct SnapshotWriter {
    pub dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl SnapshotWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }
}

impl Observer for SnapshotWriter {
    fn observe(&mut self, state: &State, step: usize) -> Result<()> {
        let path = self.dir.join(format!("step_{step:06}.csv"));
        fs::write(&path, snapshot_text(state))?;
        self.written.push(path);
        Ok(())
    }
}

/// Collects the velocity source of each observed state.
pub struct HistoryRecorder {
    pub h_quad: f64,
    pub history: VelocityHistory,
}

impl HistoryRecorder {
    pub fn new(h_quad: f64, interpolation: Interpolation) -> Self {
        Self {
            h_quad,
            history: VelocityHistory::new(interpolation),
        }
    }
}

impl Observer for HistoryRecorder {
    fn observe(&mut self, state: &State, _step: usize) -> Result<()> {
        let src = match state {
            State::Patch(s) => s.source(self.h_quad),
            State::Blobs(s) => s.source(),
        };
        self.history.push(state.t(), src)
    }
}

/// Rebuilds a velocity history from snapshot files sorted by time.
pub fn history_from_snapshots(
    snapshots: &[Snapshot],
    xi_value: f64,
    h_quad: f64,
    interpolation: Interpolation,
) -> Result<VelocityHistory> {
    let mut h = VelocityHistory::new(interpolation);
    let mut sorted: Vec<&Snapshot> = snapshots.iter().collect();
    sorted.sort_by(|a, b| a.t().total_cmp(&b.t()));
    for s in sorted {
        h.push(s.t(), s.source(xi_value, h_quad)?)?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{BlobState, PatchState};
    use crate::geometry::AxiBall;

    #[test]
    fn patch_round_trip() {
        let a = AxiBall::unit().cross_section(37);
        let b = AxiBall::new(3.0, 0.25).unwrap().cross_section(11);
        let s = State::Patch(PatchState::new(1.0 / 3.0, vec![a.clone(), b.clone()], 1.0).unwrap());
        let text = snapshot_text(&s);
        assert!(text.starts_with("# t=0.3333333333333333 nodes=38 closed=1\n"));
        let Snapshot::Patch { t, contours } = parse_snapshot(&text).unwrap() else {
            panic!()
        };
        assert_eq!(t, 1.0 / 3.0);
        assert_eq!(contours, vec![a, b]);
    }

    #[test]
    fn blob_round_trip() {
        let blobs = vec![
            Blob::new(HalfPlanePoint::new(0.1, 0.2), 1.0, 0.01),
            Blob::new(HalfPlanePoint::new(0.7, -0.4), 0.0, 0.02),
        ];
        let s = State::Blobs(BlobState::new(
            2.5,
            BlobField::new(blobs.clone(), 0.05).unwrap(),
            None,
        ));
        let snap = parse_snapshot(&snapshot_text(&s)).unwrap();
        assert_eq!(
            snap,
            Snapshot::Blobs {
                t: 2.5,
                blobs,
                core: 0.05
            }
        );
    }

    #[test]
    fn truncated_file_is_rejected() {
        let s = State::Patch(
            PatchState::new(0.0, vec![AxiBall::unit().cross_section(8)], 1.0).unwrap(),
        );
        let text = snapshot_text(&s);
        let cut: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(parse_snapshot(&cut).is_err());
    }

    struct Count(Vec<usize>);
    impl Observer for Count {
        fn observe(&mut self, _s: &State, step: usize) -> Result<()> {
            self.0.push(step);
            Ok(())
        }
    }

    #[test]
    fn every_forwards_final_state() {
        let s = State::Patch(
            PatchState::new(0.0, vec![AxiBall::unit().cross_section(8)], 1.0).unwrap(),
        );
        let mut e = Every::new(3, Count(Vec::new()));
        for k in 0..=7 {
            e.observe(&s, k).unwrap();
        }
        e.finish(&s).unwrap();
        assert_eq!(e.inner.0, vec![0, 3, 6, 7]);
    }
}
