use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Cut `wire` between gate `position − 1` and gate `position` (indices
/// into the circuit's gate list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CutPoint {
    pub wire: usize,
    pub position: usize,
}

/// A subcircuit over wire segments. Local wire `i` is `segments[i]`, a
/// (wire, segment index) pair; segment `k` of a wire lies between its
/// `k`-th and `k+1`-th cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub segments: Vec<(usize, usize)>,
    /// Indices into the original gate list, in order.
    pub gates: Vec<usize>,
    /// (local wire, original wire) for final segments, which carry the
    /// fragment's share of the output bitstring.
    pub outputs: Vec<(usize, usize)>,
    /// (local wire, cut index) measured at the end of this fragment.
    pub measured: Vec<(usize, usize)>,
    /// (local wire, cut index) prepared at the start of this fragment.
    pub prepared: Vec<(usize, usize)>,
}

impl Fragment {
    pub fn width(&self) -> usize {
        self.segments.len()
    }
}

#[derive(Debug, Clone)]
pub struct CutPlan {
    pub circuit: Circuit,
    /// Sorted by (wire, position).
    pub cuts: Vec<CutPoint>,
    pub fragments: Vec<Fragment>,
    pub max_width: usize,
}

impl CutPlan {
    pub fn max_fragment_width(&self) -> usize {
        self.fragments.iter().map(Fragment::width).max().unwrap_or(0)
    }

    /// `CUT wire position` lines.
    pub fn manifest(&self) -> String {
        write_cut_manifest(&self.cuts)
    }
}

/// Splits `circuit` into fragments of at most `max_width` wires.
///
/// Without manual cuts, gates are scanned in order and a new time slice
/// starts whenever the next gate would push the slice past `max_width`
/// wires; every wire used in the closed slice and used again later is
/// cut at the boundary.
pub fn plan_cuts(circuit: &Circuit, max_width: usize, manual: Option<&[CutPoint]>) -> Result<CutPlan> {
    if max_width < 2 {
        return Err(Error::Planning(format!("max_width {max_width} is below 2")));
    }
    if let Some(g) = circuit.gates().iter().find(|g| g.width() > max_width) {
        return Err(Error::Planning(format!("gate {g} is wider than {max_width} wires")));
    }
    let cuts = match manual {
        Some(points) => validate_manual(circuit, points)?,
        None => greedy_cuts(circuit, max_width),
    };
    let plan = build_plan(circuit, cuts, max_width);
    if let Some(f) = plan.fragments.iter().find(|f| f.width() > max_width) {
        return Err(Error::Planning(format!("cuts leave a {}-wire fragment, above max_width {max_width}", f.width())));
    }
    Ok(plan)
}

fn greedy_cuts(circuit: &Circuit, max_width: usize) -> Vec<CutPoint> {
    let gates = circuit.gates();
    let mut last_use = vec![None; circuit.n_qubits()];
    for (i, g) in gates.iter().enumerate() {
        for w in g.wires() {
            last_use[w] = Some(i);
        }
    }
    let mut cuts = Vec::new();
    let mut slice: Vec<usize> = Vec::new();
    for (i, g) in gates.iter().enumerate() {
        let fresh = g.wires().filter(|w| !slice.contains(w)).count();
        if slice.len() + fresh > max_width {
            for &w in &slice {
                if last_use[w].is_some_and(|l| l >= i) {
                    cuts.push(CutPoint { wire: w, position: i });
                }
            }
            slice.clear();
        }
        for w in g.wires() {
            if !slice.contains(&w) {
                slice.push(w);
            }
        }
    }
    cuts.sort();
    cuts
}

fn validate_manual(circuit: &Circuit, points: &[CutPoint]) -> Result<Vec<CutPoint>> {
    let gates = circuit.gates();
    let mut cuts = points.to_vec();
    cuts.sort();
    for (i, c) in cuts.iter().enumerate() {
        if i > 0 && cuts[i - 1] == *c {
            return Err(Error::Planning(format!("duplicate cut on wire {} at {}", c.wire, c.position)));
        }
        if c.wire >= circuit.n_qubits() || c.position > gates.len() {
            return Err(Error::Planning(format!("cut ({}, {}) outside the circuit", c.wire, c.position)));
        }
        let before = gates[..c.position].iter().any(|g| g.touches(c.wire));
        let after = gates[c.position..].iter().any(|g| g.touches(c.wire));
        if !before || !after {
            return Err(Error::Planning(format!(
                "cut ({}, {}) does not separate two gates on its wire",
                c.wire, c.position
            )));
        }
    }
    // two cuts on one wire with no gate between them would leave an empty segment
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.wire == b.wire && !gates[a.position..b.position].iter().any(|g| g.touches(a.wire)) {
            return Err(Error::Planning(format!(
                "cuts on wire {} at {} and {} enclose no gate",
                a.wire, a.position, b.position
            )));
        }
    }
    Ok(cuts)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn build_plan(circuit: &Circuit, cuts: Vec<CutPoint>, max_width: usize) -> CutPlan {
    let n = circuit.n_qubits();
    let gates = circuit.gates();
    // positions of cuts per wire, ascending
    let mut wire_cuts: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ci, c) in cuts.iter().enumerate() {
        wire_cuts[c.wire].push((c.position, ci));
    }
    let segment_of = |w: usize, gate: usize| wire_cuts[w].iter().filter(|(p, _)| *p <= gate).count();
    let mut seg_base = vec![0usize; n + 1];
    for w in 0..n {
        seg_base[w + 1] = seg_base[w] + wire_cuts[w].len() + 1;
    }
    let node = |w: usize, k: usize| seg_base[w] + k;
    let total = seg_base[n];
    let mut parent: Vec<usize> = (0..total).collect();
    for (i, g) in gates.iter().enumerate() {
        let ws: Vec<usize> = g.wires().collect();
        for pair in ws.windows(2) {
            let a = find(&mut parent, node(pair[0], segment_of(pair[0], i)));
            let b = find(&mut parent, node(pair[1], segment_of(pair[1], i)));
            parent[a.max(b)] = a.min(b);
        }
    }
    // components in order of their smallest segment, then first-fit packed
    let mut components: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut comp_of_root = std::collections::BTreeMap::new();
    for w in 0..n {
        for k in 0..=wire_cuts[w].len() {
            let root = find(&mut parent, node(w, k));
            let idx = *comp_of_root.entry(root).or_insert_with(|| {
                components.push(Vec::new());
                components.len() - 1
            });
            components[idx].push((w, k));
        }
    }
    let mut bins: Vec<Vec<(usize, usize)>> = Vec::new();
    for comp in components {
        match bins.iter_mut().find(|b| b.len() + comp.len() <= max_width) {
            Some(b) => b.extend(comp),
            None => bins.push(comp),
        }
    }
    let fragments = bins
        .into_iter()
        .map(|mut segments| {
            segments.sort();
            let local = |w: usize, k: usize| segments.iter().position(|&s| s == (w, k));
            let gate_ids: Vec<usize> = (0..gates.len())
                .filter(|&i| {
                    let w = gates[i].wires().next().expect("gate has a wire");
                    local(w, segment_of(w, i)).is_some()
                })
                .collect();
            let mut outputs = Vec::new();
            let mut measured = Vec::new();
            let mut prepared = Vec::new();
            for (li, &(w, k)) in segments.iter().enumerate() {
                if k == wire_cuts[w].len() {
                    outputs.push((li, w));
                } else {
                    measured.push((li, wire_cuts[w][k].1));
                }
                if k > 0 {
                    prepared.push((li, wire_cuts[w][k - 1].1));
                }
            }
            measured.sort_by_key(|&(_, c)| c);
            prepared.sort_by_key(|&(_, c)| c);
            Fragment { segments, gates: gate_ids, outputs, measured, prepared }
        })
        .collect();
    CutPlan { circuit: circuit.clone(), cuts, fragments, max_width }
}

pub fn write_cut_manifest(cuts: &[CutPoint]) -> String {
    let mut out = String::new();
    for c in cuts {
        let _ = writeln!(out, "CUT {} {}", c.wire, c.position);
    }
    out
}

pub fn parse_cut_manifest(text: &str) -> Result<Vec<CutPoint>> {
    let mut cuts = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["CUT", w, p] => {
                let wire = w.parse().map_err(|_| Error::parse(start, format!("bad wire `{w}`")))?;
                let position = p.parse().map_err(|_| Error::parse(start, format!("bad position `{p}`")))?;
                cuts.push(CutPoint { wire, position });
            }
            _ => return Err(Error::parse(start, "expected `CUT wire position`")),
        }
    }
    Ok(cuts)
}
