use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{NodeId, TreeTopology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Down,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotUse {
    pub slot: u32,
    pub direction: Direction,
}

/// Slots given to one child link in one subframe.
///
/// The link occupies the expanded window `[window_start, window_start +
/// alpha * n_total)`. The physical link attached to the scheduling BS is
/// active on every window slot for single-hop links, and on the even
/// offsets for relay paths; `slots` lists those active slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkAllocation {
    pub link: NodeId,
    pub alpha: u8,
    pub n_total: u32,
    pub n_down: u32,
    pub n_up: u32,
    pub window_start: u32,
    pub slots: Vec<SlotUse>,
}

impl LinkAllocation {
    pub fn new(link: NodeId, alpha: u8, n_down: u32, n_up: u32, window_start: u32) -> Self {
        let n_total = n_down + n_up;
        let slots = active_offsets(alpha, n_total, 0)
            .enumerate()
            .map(|(i, off)| SlotUse {
                slot: window_start + off,
                direction: if (i as u32) < n_down {
                    Direction::Down
                } else {
                    Direction::Up
                },
            })
            .collect();
        Self {
            link,
            alpha,
            n_total,
            n_down,
            n_up,
            window_start,
            slots,
        }
    }

    pub fn window(&self) -> Range<u32> {
        self.window_start..self.window_start + u32::from(self.alpha) * self.n_total
    }

    /// Slots in which the physical link attached to the child end is active:
    /// the odd offsets of a relay path's window.
    pub fn child_side_slots(&self) -> Vec<u32> {
        active_offsets(self.alpha, self.n_total, 1)
            .map(|off| self.window_start + off)
            .collect()
    }
}

fn active_offsets(alpha: u8, n: u32, phase: u32) -> impl Iterator<Item = u32> {
    let step = u32::from(alpha);
    let phase = if alpha == 1 { 0 } else { phase };
    (0..n).map(move |m| m * step + phase)
}

/// Final valid schedule computed by one BS for one target subframe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalSchedule {
    pub node: NodeId,
    pub subframe: u64,
    /// One entry per child link with at least one slot, ascending by link.
    pub links: Vec<LinkAllocation>,
}

impl FinalSchedule {
    pub fn empty(node: NodeId, subframe: u64) -> Self {
        Self {
            node,
            subframe,
            links: Vec::new(),
        }
    }

    pub fn allocation(&self, link: NodeId) -> Option<&LinkAllocation> {
        self.links.iter().find(|a| a.link == link)
    }

    pub fn total_slots(&self) -> u32 {
        self.links.iter().map(|a| a.n_total).sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("{n_total} slots allocated but both queues are empty")]
    InconsistentSchedule { n_total: u32 },
    #[error("no placement found for link {0}")]
    PlacementFailure(NodeId),
}

/// Splits `n_total` slots between directions by the queue ratio, rounding
/// the downlink share half-up. When both queues are non-empty and at least
/// two slots exist, each direction keeps one.
pub fn split_directions(n_total: u32, q_down: u64, q_up: u64) -> Result<(u32, u32), ScheduleError> {
    if n_total == 0 {
        return Ok((0, 0));
    }
    let sum = u128::from(q_down) + u128::from(q_up);
    if sum == 0 {
        return Err(ScheduleError::InconsistentSchedule { n_total });
    }
    let down = ((2 * u128::from(n_total) * u128::from(q_down) + sum) / (2 * sum)) as u32;
    let mut down = down.min(n_total);
    if q_down > 0 && q_up > 0 && n_total >= 2 {
        down = down.clamp(1, n_total - 1);
    }
    Ok((down, n_total - down))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacementRequest {
    pub link: NodeId,
    pub alpha: u8,
    pub n: u32,
}

/// Result of [`place_slots_with_repair`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    /// `(link, window start, slot count)` for every link still holding slots.
    pub windows: Vec<(NodeId, u32, u32)>,
    pub repairs: u32,
}

struct Board<'a> {
    topology: &'a TreeTopology,
    node: NodeId,
    n_d: u32,
    radios: u32,
    occupancy: Vec<u32>,
    parent_window: Option<Range<u32>>,
    placed: Vec<(NodeId, Range<u32>)>,
}

impl<'a> Board<'a> {
    fn new(
        topology: &'a TreeTopology,
        node: NodeId,
        parent: Option<&LinkAllocation>,
        n_d: u32,
    ) -> Self {
        let mut occupancy = vec![0u32; n_d as usize];
        if let Some(p) = parent {
            for s in p.child_side_slots() {
                if let Some(o) = occupancy.get_mut(s as usize) {
                    *o += 1;
                }
            }
        }
        Self {
            topology,
            node,
            n_d,
            radios: topology.radio_chains(node),
            occupancy,
            parent_window: parent.map(|p| p.window()),
            placed: Vec::new(),
        }
    }

    /// Leftmost feasible window start for `n` slots of `link`.
    fn first_fit(&self, link: NodeId, alpha: u8, n: u32) -> Option<u32> {
        let len = u32::from(alpha) * n;
        if len > self.n_d {
            return None;
        }
        let overlaps = |a: &Range<u32>, b: &Range<u32>| a.start < b.end && b.start < a.end;
        'start: for start in 0..=(self.n_d - len) {
            let window = start..start + len;
            if let Some(pw) = &self.parent_window {
                if self.topology.interferes(self.node, link) && overlaps(pw, &window) {
                    continue;
                }
            }
            for (other, w) in &self.placed {
                if self.topology.interferes(*other, link) && overlaps(w, &window) {
                    continue 'start;
                }
            }
            for off in active_offsets(alpha, n, 0) {
                if self.occupancy[(start + off) as usize] >= self.radios {
                    continue 'start;
                }
            }
            return Some(start);
        }
        None
    }

    fn commit(&mut self, link: NodeId, alpha: u8, n: u32, start: u32) {
        for off in active_offsets(alpha, n, 0) {
            self.occupancy[(start + off) as usize] += 1;
        }
        self.placed
            .push((link, start..start + u32::from(alpha) * n));
    }
}

fn placement_order(requests: &[PlacementRequest]) -> Vec<PlacementRequest> {
    let mut order: Vec<PlacementRequest> = requests.iter().copied().filter(|r| r.n > 0).collect();
    order.sort_by(|a, b| {
        let wa = u32::from(a.alpha) * a.n;
        let wb = u32::from(b.alpha) * b.n;
        wb.cmp(&wa).then(a.link.cmp(&b.link))
    });
    order
}

/// First-fit placement of contiguous expanded windows, largest window first.
///
/// Windows of interfering links are disjoint, windows of links interfering
/// with the BS's own parent link avoid that link's window, and in every slot
/// the number of active attached physical links stays within the BS's radio
/// chains (the parent link's child-side slots count against it).
pub fn place_slots(
    requests: &[PlacementRequest],
    topology: &TreeTopology,
    node: NodeId,
    parent: Option<&LinkAllocation>,
    n_d: u32,
) -> Result<Vec<(NodeId, u32)>, ScheduleError> {
    let mut board = Board::new(topology, node, parent, n_d);
    let mut out = Vec::new();
    for r in placement_order(requests) {
        let start = board
            .first_fit(r.link, r.alpha, r.n)
            .ok_or(ScheduleError::PlacementFailure(r.link))?;
        board.commit(r.link, r.alpha, r.n, start);
        out.push((r.link, start));
    }
    out.sort();
    Ok(out)
}

/// Like [`place_slots`], but a link that does not fit loses one slot at a
/// time until it does (or reaches zero). Each lost slot counts as a repair.
pub fn place_slots_with_repair(
    requests: &[PlacementRequest],
    topology: &TreeTopology,
    node: NodeId,
    parent: Option<&LinkAllocation>,
    n_d: u32,
) -> Placement {
    let mut board = Board::new(topology, node, parent, n_d);
    let mut windows = Vec::new();
    let mut repairs = 0;
    for r in placement_order(requests) {
        let mut n = r.n;
        while n > 0 {
            if let Some(start) = board.first_fit(r.link, r.alpha, n) {
                board.commit(r.link, r.alpha, n, start);
                windows.push((r.link, start, n));
                break;
            }
            n -= 1;
            repairs += 1;
        }
    }
    windows.sort();
    Placement { windows, repairs }
}

/// A broken final-schedule invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleViolation {
    NotAChildLink(NodeId),
    AlphaMismatch(NodeId),
    DirectionSplit(NodeId),
    SlotPattern(NodeId),
    WindowOutOfRange(NodeId),
    InterferingOverlap(NodeId, NodeId),
    ParentWindowOverlap(NodeId),
    RadioChains {
        slot: u32,
        active: u32,
    },
    AboveReportedCap {
        link: NodeId,
        n_total: u32,
        cap: u32,
    },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotAChildLink(l) => write!(f, "link {l} is not a child link"),
            Self::AlphaMismatch(l) => write!(f, "link {l} has the wrong expansion factor"),
            Self::DirectionSplit(l) => write!(f, "link {l} direction counts do not add up"),
            Self::SlotPattern(l) => write!(f, "link {l} active slots do not match its window"),
            Self::WindowOutOfRange(l) => write!(f, "link {l} window leaves the data slots"),
            Self::InterferingOverlap(a, b) => write!(f, "interfering links {a} and {b} overlap"),
            Self::ParentWindowOverlap(l) => {
                write!(f, "link {l} overlaps the interfering parent window")
            }
            Self::RadioChains { slot, active } => {
                write!(f, "slot {slot} uses {active} radio chains")
            }
            Self::AboveReportedCap { link, n_total, cap } => {
                write!(
                    f,
                    "link {link} got {n_total} slots above its reported cap {cap}"
                )
            }
        }
    }
}

/// Independent check of a final schedule computed at `schedule.node`.
///
/// `parent` is the allocation of that BS's own parent link for the same
/// subframe, and `caps` the reported slot caps of its children at the time
/// the schedule was computed.
pub fn check_schedule(
    topology: &TreeTopology,
    schedule: &FinalSchedule,
    parent: Option<&LinkAllocation>,
    caps: &[(NodeId, u32)],
    n_d: u32,
) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    let node = schedule.node;
    let mut active_per_slot = vec![0u32; n_d as usize];
    if let Some(p) = parent {
        let len = u32::from(p.alpha) * p.n_total;
        for m in 0..p.n_total {
            let s = if p.alpha == 2 {
                p.window_start + 2 * m + 1
            } else {
                p.window_start + m
            };
            if s < n_d && s < p.window_start + len {
                active_per_slot[s as usize] += 1;
            }
        }
    }
    for a in &schedule.links {
        if topology.parent(a.link) != Some(node) || a.link.is_macro() {
            out.push(ScheduleViolation::NotAChildLink(a.link));
            continue;
        }
        if topology.alpha(a.link) != a.alpha {
            out.push(ScheduleViolation::AlphaMismatch(a.link));
        }
        let downs = a
            .slots
            .iter()
            .filter(|s| s.direction == Direction::Down)
            .count() as u32;
        if a.n_down + a.n_up != a.n_total || downs != a.n_down {
            out.push(ScheduleViolation::DirectionSplit(a.link));
        }
        let end = a.window_start + u32::from(a.alpha) * a.n_total;
        if end > n_d {
            out.push(ScheduleViolation::WindowOutOfRange(a.link));
            continue;
        }
        let expected: Vec<u32> = (0..a.n_total)
            .map(|m| a.window_start + m * u32::from(a.alpha))
            .collect();
        let got: Vec<u32> = a.slots.iter().map(|s| s.slot).collect();
        if got != expected {
            out.push(ScheduleViolation::SlotPattern(a.link));
        }
        for s in got.iter().filter(|&&s| s < n_d) {
            active_per_slot[*s as usize] += 1;
        }
        if let Some(p) = parent {
            let p_end = p.window_start + u32::from(p.alpha) * p.n_total;
            if topology.interferes(node, a.link) && a.window_start < p_end && p.window_start < end {
                out.push(ScheduleViolation::ParentWindowOverlap(a.link));
            }
        }
        if let Some(&(_, cap)) = caps.iter().find(|(l, _)| *l == a.link) {
            if a.n_total > cap {
                out.push(ScheduleViolation::AboveReportedCap {
                    link: a.link,
                    n_total: a.n_total,
                    cap,
                });
            }
        }
    }
    for (i, a) in schedule.links.iter().enumerate() {
        for b in &schedule.links[i + 1..] {
            if topology.interferes(a.link, b.link) {
                let a_end = a.window_start + u32::from(a.alpha) * a.n_total;
                let b_end = b.window_start + u32::from(b.alpha) * b.n_total;
                if a.window_start < b_end && b.window_start < a_end {
                    out.push(ScheduleViolation::InterferingOverlap(a.link, b.link));
                }
            }
        }
    }
    let radios = topology.radio_chains(node);
    for (slot, &active) in active_per_slot.iter().enumerate() {
        if active > radios {
            out.push(ScheduleViolation::RadioChains {
                slot: slot as u32,
                active,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::NodeSpec;

    fn star(children: usize, alpha: u8, radios: u32, pairs: &[(usize, usize)]) -> TreeTopology {
        let mut nodes = vec![NodeSpec {
            parent: None,
            alpha: 1,
            radio_chains: radios,
        }];
        for _ in 0..children {
            nodes.push(NodeSpec {
                parent: Some(NodeId(0)),
                alpha,
                radio_chains: 1,
            });
        }
        let pairs: Vec<_> = pairs.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect();
        TreeTopology::new(&nodes, &pairs, 1).unwrap()
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_directions(9, 20, 10), Ok((6, 3)));
        assert_eq!(split_directions(5, 7, 0), Ok((5, 0)));
        assert_eq!(split_directions(0, 7, 7), Ok((0, 0)));
        assert_eq!(
            split_directions(3, 0, 0),
            Err(ScheduleError::InconsistentSchedule { n_total: 3 })
        );
        // 2 * 1/100 rounds to 0, but both directions are non-empty.
        assert_eq!(split_directions(2, 1, 99), Ok((1, 1)));
        assert_eq!(split_directions(1, 1, 99), Ok((0, 1)));
    }

    #[test]
    fn single_link_is_leftmost() {
        let t = star(1, 1, 1, &[]);
        let req = [PlacementRequest {
            link: NodeId(1),
            alpha: 1,
            n: 5,
        }];
        assert_eq!(
            place_slots(&req, &t, NodeId(0), None, 22),
            Ok(vec![(NodeId(1), 0)])
        );
        let a = LinkAllocation::new(NodeId(1), 1, 5, 0, 0);
        assert_eq!(
            a.slots.iter().map(|s| s.slot).collect::<Vec<_>>(),
            vec![0, 1, 2, 3, 4]
        );
    }

    #[test]
    fn interfering_pair_splits_the_subframe() {
        let t = star(2, 1, 2, &[(1, 2)]);
        let req = [
            PlacementRequest {
                link: NodeId(1),
                alpha: 1,
                n: 11,
            },
            PlacementRequest {
                link: NodeId(2),
                alpha: 1,
                n: 11,
            },
        ];
        assert_eq!(
            place_slots(&req, &t, NodeId(0), None, 22),
            Ok(vec![(NodeId(1), 0), (NodeId(2), 11)])
        );
    }

    #[test]
    fn relay_link_alternates() {
        let a = LinkAllocation::new(NodeId(1), 2, 2, 1, 0);
        assert_eq!(a.window(), 0..6);
        assert_eq!(
            a.slots.iter().map(|s| s.slot).collect::<Vec<_>>(),
            vec![0, 2, 4]
        );
        assert_eq!(a.child_side_slots(), vec![1, 3, 5]);
    }

    #[test]
    fn non_interfering_relay_links_interleave_on_one_radio() {
        let t = star(2, 2, 1, &[]);
        let req = [
            PlacementRequest {
                link: NodeId(1),
                alpha: 2,
                n: 3,
            },
            PlacementRequest {
                link: NodeId(2),
                alpha: 2,
                n: 3,
            },
        ];
        assert_eq!(
            place_slots(&req, &t, NodeId(0), None, 22),
            Ok(vec![(NodeId(1), 0), (NodeId(2), 1)])
        );
    }

    #[test]
    fn triangle_needs_repair() {
        // Three mutually interfering links of 8 slots: every pair fits in 22
        // slots, the triple does not.
        let t = star(3, 1, 3, &[(1, 2), (1, 3), (2, 3)]);
        let req: Vec<_> = (1..=3)
            .map(|l| PlacementRequest {
                link: NodeId(l),
                alpha: 1,
                n: 8,
            })
            .collect();
        assert_eq!(
            place_slots(&req, &t, NodeId(0), None, 22),
            Err(ScheduleError::PlacementFailure(NodeId(3)))
        );
        let placed = place_slots_with_repair(&req, &t, NodeId(0), None, 22);
        assert_eq!(placed.repairs, 2);
        assert_eq!(
            placed.windows,
            vec![(NodeId(1), 0, 8), (NodeId(2), 8, 8), (NodeId(3), 16, 6)]
        );
    }

    #[test]
    fn checker_flags_overlap() {
        let t = star(2, 1, 2, &[(1, 2)]);
        let schedule = FinalSchedule {
            node: NodeId(0),
            subframe: 1,
            links: vec![
                LinkAllocation::new(NodeId(1), 1, 5, 0, 0),
                LinkAllocation::new(NodeId(2), 1, 5, 0, 4),
            ],
        };
        assert_eq!(
            check_schedule(&t, &schedule, None, &[], 22),
            vec![ScheduleViolation::InterferingOverlap(NodeId(1), NodeId(2))]
        );
    }
}
