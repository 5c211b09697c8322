//! Query oracles for one, two, and `k` edge failures, bundled with a
//! versioned binary serialization.
//!
//! Single-failure max-flow queries run on the family of the calibrated
//! subgraph. Dual-failure queries run on the family of the pruned graph,
//! because the calibrated subgraph only preserves single-failure values.

pub mod kfault;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_invariant, Error, Result};
use crate::family::{build_family, calibrate, classify_edges, CalibratedSubgraph, CriticalityLabels, FlowFamily, NullBounds};
use crate::flow::{mask_caps, ResidualGraph, UnitFlow};
use crate::ftscc::{toggle_set, FtSccIndex};
use crate::graph::{prune_to_st_paths, EdgeId, EdgeSet, FlowNetwork, StPruning};
use crate::mincut::{CutPartition, MinCutOracle};

pub use kfault::{enumerate_minimal_cuts, AugmentedEntry, KFaultOracle, MinimalCut};

/// Which family a [`FlowDiff`] is relative to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffBase {
    /// `f̃` of the calibrated-subgraph family.
    Calibrated,
    /// `f̃` of the pruned-graph family.
    Pruned,
}

/// A post-failure flow as the edges whose flow differs from `f̃`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowDiff {
    pub base: DiffBase,
    /// Ascending.
    pub toggled: Vec<EdgeId>,
    pub new_value: u32,
}

/// Branch taken by the dual min-cut query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualBranch {
    /// At most one failed edge lies in the pruned graph.
    Reduced,
    /// Some failed edge is critical.
    Critical,
    /// Both failed edges are non-critical.
    NonCritical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensitivityOracle {
    net: FlowNetwork,
    pruning: StPruning,
    lambda: u32,
    calibrated: CalibratedSubgraph,
    cal_labels: CriticalityLabels,
    cal_family: FlowFamily,
    labels: CriticalityLabels,
    family: FlowFamily,
    /// Residual index per member of `family`.
    ft: Vec<FtSccIndex>,
    mincut: MinCutOracle,
    kfault: Option<KFaultOracle>,
}

const MAGIC: &[u8; 8] = b"FLOWSNTY";
const FORMAT_VERSION: u16 = 1;

impl SensitivityOracle {
    /// Builds every structure; the `k`-failure oracle only when `k` is given.
    pub fn build(net: &FlowNetwork, k: Option<usize>) -> Result<Self> {
        let pruning = prune_to_st_paths(net);
        let labels = classify_edges(net, &pruning.kept)?;
        let lambda = labels.lambda;
        let n_bound = pruning.kept_vertex_count();

        let calibrated = calibrate(net, &pruning.kept, &labels);
        let cal_labels = classify_edges(net, &calibrated.kept)?;
        ensure_invariant!(cal_labels.lambda == lambda, "calibration changed the max-flow");
        ensure_invariant!(
            cal_labels.critical == labels.critical,
            "calibration changed the critical edge set"
        );
        let cal_family = build_family(net, &cal_labels, NullBounds::Enforce { n: n_bound })?;
        let family = build_family(net, &labels, NullBounds::Unchecked)?;

        let caps = mask_caps(&pruning.kept);
        let mut ft = Vec::with_capacity(family.members.len());
        for f in &family.members {
            let r = ResidualGraph::new(&net.graph, net.source, net.sink, &caps, &f.as_int())?;
            ft.push(FtSccIndex::build(r, net.source, net.sink));
        }
        let mincut = MinCutOracle::build(net, &pruning, family.f_tilde(), &labels.critical)?;
        let kfault = match k {
            Some(k) => Some(KFaultOracle::build(net, &pruning, mincut.clone(), lambda, k)?),
            None => None,
        };
        log::info!(
            "built oracle: n={} m={} λ={} calibrated edges={} k={:?}",
            net.vertex_count(),
            net.edge_count(),
            lambda,
            calibrated.kept.len(),
            k
        );
        Ok(SensitivityOracle {
            net: net.clone(),
            pruning,
            lambda,
            calibrated,
            cal_labels,
            cal_family,
            labels,
            family,
            ft,
            mincut,
            kfault,
        })
    }

    pub fn network(&self) -> &FlowNetwork {
        &self.net
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn pruning(&self) -> &StPruning {
        &self.pruning
    }

    pub fn calibrated(&self) -> &CalibratedSubgraph {
        &self.calibrated
    }

    pub fn calibrated_labels(&self) -> &CriticalityLabels {
        &self.cal_labels
    }

    pub fn calibrated_family(&self) -> &FlowFamily {
        &self.cal_family
    }

    pub fn labels(&self) -> &CriticalityLabels {
        &self.labels
    }

    pub fn family(&self) -> &FlowFamily {
        &self.family
    }

    pub fn ft_index(&self, member: usize) -> &FtSccIndex {
        &self.ft[member]
    }

    pub fn mincut(&self) -> &MinCutOracle {
        &self.mincut
    }

    pub fn kfault(&self) -> Option<&KFaultOracle> {
        self.kfault.as_ref()
    }

    fn check_edge(&self, e: EdgeId) -> Result<()> {
        if e.index() >= self.net.edge_count() {
            return Err(Error::UnknownEdge(e.0));
        }
        Ok(())
    }

    fn check_pair(&self, e: EdgeId, e2: EdgeId) -> Result<()> {
        self.check_edge(e)?;
        self.check_edge(e2)?;
        if e == e2 {
            return Err(Error::DuplicateEdge(e));
        }
        Ok(())
    }

    /// Flow of `x` under member `i` of `fam`, by null-set membership.
    fn member_flow(fam: &FlowFamily, i: usize, x: EdgeId) -> bool {
        fam.scope.contains(x) && !fam.in_null(i, x)
    }

    /// Canonical member of the calibrated family for failing `e`, or `None`
    /// when `f̃` already avoids `e`.
    fn single_member(&self, e: EdgeId) -> Option<usize> {
        let fam = &self.cal_family;
        if !fam.scope.contains(e) || !fam.f_tilde().on(e) {
            return None;
        }
        fam.canonical_for_edge(e)
    }

    /// Max-flow value after failing `e`.
    pub fn max_flow_single(&self, e: EdgeId) -> Result<u32> {
        self.check_edge(e)?;
        Ok(self
            .single_member(e)
            .map_or(self.lambda, |i| self.cal_family.members[i].value))
    }

    /// Flow on `x` in the canonical max-flow after failing `e`.
    pub fn query_edge_flow(&self, e: EdgeId, x: EdgeId) -> Result<bool> {
        self.check_pair(e, x)?;
        let fam = &self.cal_family;
        let member = self.single_member(e).unwrap_or(fam.representative);
        Ok(Self::member_flow(fam, member, x))
    }

    /// Canonical post-failure max-flow as a diff against `f̃`.
    pub fn report_flow_diff_single(&self, e: EdgeId) -> Result<FlowDiff> {
        self.check_edge(e)?;
        let fam = &self.cal_family;
        let Some(i) = self.single_member(e) else {
            return Ok(FlowDiff {
                base: DiffBase::Calibrated,
                toggled: Vec::new(),
                new_value: self.lambda,
            });
        };
        let base = &fam.nullsets[fam.representative];
        let other = &fam.nullsets[i];
        let mut toggled: Vec<EdgeId> = base
            .symmetric_difference(other)
            .map(|&x| EdgeId(x))
            .collect();
        toggled.sort_unstable();
        Ok(FlowDiff {
            base: DiffBase::Calibrated,
            toggled,
            new_value: fam.members[i].value,
        })
    }

    /// Max-flow after failing `e` and `e2`, as a diff against `f̃` of the
    /// pruned-graph family.
    pub fn report_flow_diff_dual(&self, e: EdgeId, e2: EdgeId) -> Result<FlowDiff> {
        self.check_pair(e, e2)?;
        let fam = &self.family;
        let (e, e2) = match (fam.scope.contains(e), fam.scope.contains(e2)) {
            (false, false) => {
                return Ok(FlowDiff {
                    base: DiffBase::Pruned,
                    toggled: Vec::new(),
                    new_value: self.lambda,
                })
            }
            (false, true) => {
                log::debug!("dual query with pruned {e}: reduced to a single failure of {e2}");
                (e2, e)
            }
            _ => (e, e2),
        };
        // Highest value among members avoiding e; ties to the lowest index.
        let mut pick: Option<usize> = None;
        for (i, f) in fam.members.iter().enumerate() {
            if !f.on(e) && pick.is_none_or(|p| f.value > fam.members[p].value) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else {
            return Err(Error::Invariant(format!("no family member avoids {e}")));
        };
        let f = &fam.members[i];
        let mut toggled = EdgeSet::empty(self.net.edge_count());
        for x in fam.nullsets[fam.representative].symmetric_difference(&fam.nullsets[i]) {
            toggled.insert(EdgeId(*x));
        }
        if !f.on(e2) {
            return Ok(FlowDiff {
                base: DiffBase::Pruned,
                toggled: toggled.to_vec(),
                new_value: f.value,
            });
        }
        let ft = &self.ft[i];
        let (cycle, value) = match ft.cycle_through_arc_without(e2, e, false)? {
            Some(c) => (c, f.value),
            None => match ft.cycle_through_arc_without(e2, e, true)? {
                Some(c) => (c, f.value - 1),
                None => {
                    return Err(Error::Invariant(format!(
                        "no residual cycle through reversed {e2} even with the (s,t) arc"
                    )))
                }
            },
        };
        for x in toggle_set(&cycle) {
            toggled.set(x, !toggled.contains(x));
        }
        Ok(FlowDiff {
            base: DiffBase::Pruned,
            toggled: toggled.to_vec(),
            new_value: value,
        })
    }

    /// Flow encoded by a diff.
    pub fn apply_diff(&self, diff: &FlowDiff) -> UnitFlow {
        let base = match diff.base {
            DiffBase::Calibrated => self.cal_family.f_tilde(),
            DiffBase::Pruned => self.family.f_tilde(),
        };
        let mut f = base.clone();
        for &x in &diff.toggled {
            f.carries.set(x, !f.carries.contains(x));
        }
        f.value = diff.new_value;
        f
    }

    /// Min-cut size after failing `e` and `e2`.
    pub fn mincut_size_dual(&self, e: EdgeId, e2: EdgeId) -> Result<u32> {
        self.mincut_size_dual_traced(e, e2).map(|(v, _)| v)
    }

    pub fn mincut_size_dual_traced(&self, e: EdgeId, e2: EdgeId) -> Result<(u32, DualBranch)> {
        self.check_pair(e, e2)?;
        let lambda = self.lambda;
        let labels = &self.labels;
        let live: Vec<EdgeId> = [e, e2].into_iter().filter(|&x| labels.scope.contains(x)).collect();
        match live[..] {
            [] => return Ok((lambda, DualBranch::Reduced)),
            [x] => return Ok((lambda - u32::from(labels.is_critical(x)), DualBranch::Reduced)),
            _ => {}
        }
        if labels.is_critical(e) || labels.is_critical(e2) {
            let drop = if self.mincut.decreases_by_k(&[e, e2])? { 2 } else { 1 };
            return Ok((lambda - drop, DualBranch::Critical));
        }
        let fam = &self.family;
        let fe = fam
            .canonical_for_edge(e)
            .ok_or_else(|| Error::Invariant(format!("no canonical flow for {e}")))?;
        let (u, v) = self.net.graph.endpoints(e2);
        let decreases = fam.nullmin1_union.contains(e)
            && fam.nullmin1_union.contains(e2)
            && !fam.in_nullmin1(fe, e2)
            && !self.ft[fe].strongly_connected_without(u, v, e)?;
        Ok((lambda - u32::from(decreases), DualBranch::NonCritical))
    }

    fn kfault_oracle(&self) -> Result<&KFaultOracle> {
        self.kfault
            .as_ref()
            .ok_or_else(|| Error::Precondition("oracle was built without k-failure support".into()))
    }

    pub fn mincut_size_k(&self, failed: &[EdgeId]) -> Result<u32> {
        self.kfault_oracle()?.mincut_size_k(failed)
    }

    pub fn mincut_partition_k(&self, failed: &[EdgeId]) -> Result<CutPartition> {
        self.kfault_oracle()?.mincut_partition_k(&self.net, failed)
    }

    pub fn reachable_under_failures(&self, failed: &[EdgeId]) -> Result<bool> {
        self.kfault_oracle()?.reachable_under_failures(failed)
    }

    /// Writes the magic, a little-endian format version, then a CBOR body.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())
            .map_err(|e| Error::Format(e.to_string()))?;
        ciborium::into_writer(self, w).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| Error::Format(e.to_string()))?;
        if &magic != MAGIC {
            return Err(Error::Format("not an oracle file".into()));
        }
        let mut version = [0u8; 2];
        r.read_exact(&mut version).map_err(|e| Error::Format(e.to_string()))?;
        let version = u16::from_le_bytes(version);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "format version {version}, expected {FORMAT_VERSION}"
            )));
        }
        ciborium::from_reader(r).map_err(|e| Error::Format(e.to_string()))
    }
}
