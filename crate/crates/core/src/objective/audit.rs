//! Exhaustive checks of the structural properties the coordination
//! guarantees rely on: monotonicity, submodularity, second-order
//! submodularity, and monotone submodularity of the value of coordination in
//! its neighbor argument. All of them enumerate subsets of a small universe
//! of `(agent, action)` elements, so they are capped in size.

use super::{voc_of, Choice, Objective};
use crate::error::{Error, Result};
use serde::Serialize;

/// Largest universe the audits will enumerate.
pub const MAX_AUDIT_UNIVERSE: usize = 10;

const TOL: f64 = 1e-9;

fn pick(universe: &[Choice], mask: u32) -> Vec<Choice> {
    universe
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, c)| *c)
        .collect()
}

fn guard(n: usize, limit: usize, what: &'static str, base: u128) -> Result<()> {
    if n > limit {
        return Err(Error::Capacity {
            what,
            needed: base.saturating_pow(n as u32),
            limit: base.saturating_pow(limit as u32),
        });
    }
    Ok(())
}

/// Memoized `f` over all subsets of a universe, indexed by bitmask.
fn table<O: Objective + ?Sized>(objective: &O, universe: &[Choice]) -> Vec<f64> {
    (0u32..1 << universe.len()).map(|m| objective.value(&pick(universe, m))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmodularWitness {
    pub smaller: Vec<Choice>,
    pub larger: Vec<Choice>,
    pub element: Option<Choice>,
    pub detail: String,
}

/// Normalization plus `f(A) <= f(B)` for all `A ⊆ B ⊆ universe`.
pub fn check_monotone<O: Objective + ?Sized>(objective: &O, universe: &[Choice]) -> Result<Option<SubmodularWitness>> {
    guard(universe.len(), MAX_AUDIT_UNIVERSE + 2, "monotonicity audit", 2)?;
    let f = table(objective, universe);
    if f[0].abs() > TOL {
        return Ok(Some(SubmodularWitness {
            smaller: vec![],
            larger: vec![],
            element: None,
            detail: format!("f(empty) = {}", f[0]),
        }));
    }
    // Checking single-element extensions suffices.
    for a in 0u32..f.len() as u32 {
        for i in 0..universe.len() {
            let b = a | 1 << i;
            if b != a && f[a as usize] > f[b as usize] + TOL {
                return Ok(Some(SubmodularWitness {
                    smaller: pick(universe, a),
                    larger: pick(universe, b),
                    element: Some(universe[i]),
                    detail: format!("f(A) = {} > f(B) = {}", f[a as usize], f[b as usize]),
                }));
            }
        }
    }
    Ok(None)
}

/// `f(s | A) >= f(s | B)` for all `A ⊆ B ⊆ universe`, `s ∉ B`.
pub fn check_submodular<O: Objective + ?Sized>(objective: &O, universe: &[Choice]) -> Result<Option<SubmodularWitness>> {
    guard(universe.len(), MAX_AUDIT_UNIVERSE + 2, "submodularity audit", 3)?;
    let n = universe.len();
    let f = table(objective, universe);
    let full = (1u32 << n) - 1;
    for b in 0..=full {
        // every subset a of b
        let mut a = b;
        loop {
            for s in 0..n {
                if b >> s & 1 == 1 {
                    continue;
                }
                let gain_a = f[(a | 1 << s) as usize] - f[a as usize];
                let gain_b = f[(b | 1 << s) as usize] - f[b as usize];
                if gain_a + TOL < gain_b {
                    return Ok(Some(SubmodularWitness {
                        smaller: pick(universe, a),
                        larger: pick(universe, b),
                        element: Some(universe[s]),
                        detail: format!("f(s|A) = {gain_a} < f(s|B) = {gain_b}"),
                    }));
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    Ok(None)
}

/// A violation of `f(s|C) - f(s|A∪C) >= f(s|B∪C) - f(s|A∪B∪C)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondOrderWitness {
    pub s: Choice,
    pub a: Vec<Choice>,
    pub b: Vec<Choice>,
    pub c: Vec<Choice>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Exhaustively checks second-order submodularity over all pairwise-disjoint
/// `A, B, C ⊆ universe` and every `s ∈ universe`.
///
/// Returns `Ok(None)` when no violation exists, otherwise the first witness
/// in enumeration order.
pub fn check_second_order_submodular<O: Objective + ?Sized>(
    objective: &O,
    universe: &[Choice],
) -> Result<Option<SecondOrderWitness>> {
    guard(universe.len(), MAX_AUDIT_UNIVERSE, "second-order submodularity audit", 4)?;
    let n = universe.len();
    let f = table(objective, universe);
    let gain = |s: usize, set: u32| f[(set | 1 << s) as usize] - f[set as usize];
    let labelings = 4u64.pow(n as u32);
    for code in 0..labelings {
        // base-4 digit per element: 0 = none, 1 = A, 2 = B, 3 = C
        let (mut a, mut b, mut c) = (0u32, 0u32, 0u32);
        let mut rest = code;
        for i in 0..n {
            match rest % 4 {
                1 => a |= 1 << i,
                2 => b |= 1 << i,
                3 => c |= 1 << i,
                _ => {}
            }
            rest /= 4;
        }
        for s in 0..n {
            let lhs = gain(s, c) - gain(s, a | c);
            let rhs = gain(s, b | c) - gain(s, a | b | c);
            if lhs + TOL < rhs {
                return Ok(Some(SecondOrderWitness {
                    s: universe[s],
                    a: pick(universe, a),
                    b: pick(universe, b),
                    c: pick(universe, c),
                    lhs,
                    rhs,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VocWitness {
    pub smaller: Vec<Choice>,
    pub larger: Vec<Choice>,
    pub added: Option<Choice>,
    pub detail: String,
}

/// Checks that `N -> voc(item; N)` is zero at the empty set, nondecreasing,
/// and submodular over subsets of `neighbors`.
pub fn check_voc_shape<O: Objective + ?Sized>(
    objective: &O,
    item: Choice,
    neighbors: &[Choice],
) -> Result<Option<VocWitness>> {
    if neighbors.iter().any(|c| c.agent == item.agent) {
        return Err(Error::invalid("the agent cannot be its own neighbor"));
    }
    guard(neighbors.len(), MAX_AUDIT_UNIVERSE, "value-of-coordination audit", 3)?;
    let n = neighbors.len();
    let v: Vec<f64> = (0u32..1 << n).map(|m| voc_of(objective, item, &pick(neighbors, m))).collect();
    if v[0].abs() > TOL {
        return Ok(Some(VocWitness {
            smaller: vec![],
            larger: vec![],
            added: None,
            detail: format!("voc(empty) = {}", v[0]),
        }));
    }
    let full = (1u32 << n) - 1;
    for b in 0..=full {
        let mut a = b;
        loop {
            if v[a as usize] > v[b as usize] + TOL {
                return Ok(Some(VocWitness {
                    smaller: pick(neighbors, a),
                    larger: pick(neighbors, b),
                    added: None,
                    detail: format!("not monotone: {} > {}", v[a as usize], v[b as usize]),
                }));
            }
            for s in 0..n {
                if b >> s & 1 == 1 {
                    continue;
                }
                let ga = v[(a | 1 << s) as usize] - v[a as usize];
                let gb = v[(b | 1 << s) as usize] - v[b as usize];
                if ga + TOL < gb {
                    return Ok(Some(VocWitness {
                        smaller: pick(neighbors, a),
                        larger: pick(neighbors, b),
                        added: Some(neighbors[s]),
                        detail: format!("not submodular: {ga} < {gb}"),
                    }));
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    Ok(None)
}
