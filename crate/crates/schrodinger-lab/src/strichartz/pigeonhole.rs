use super::{CubeIndex, CubeUnion};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Exponent `C` of the floor `R^{-C}` below which values are discarded.
pub const FLOOR_EXPONENT: f64 = 20.0;

/// One dyadic class `(top 2^{-k-1}, top 2^{-k}]` chosen by pigeonholing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicClass {
    pub class: u32,
    /// Largest retained value; class boundaries are measured from it.
    pub top: f64,
    pub lower: f64,
    pub upper: f64,
    /// Indices of the items in the class, ascending.
    pub members: Vec<usize>,
    pub retained_mass: f64,
    /// Mass of every item, dropped ones included.
    pub total_mass: f64,
    /// Mass of the items above the floor.
    pub eligible_mass: f64,
    /// Number of classes available above the floor, `floor(log2 R^C) + 1`.
    pub class_count: usize,
    pub dropped: usize,
}

impl DyadicClass {
    pub fn retained_fraction(&self) -> f64 {
        if self.total_mass > 0.0 {
            self.retained_mass / self.total_mass
        } else {
            1.0
        }
    }
}

/// Groups values by `floor(log2(top / v))` after dropping those below
/// `R^{-C} reference`, and returns the class with the largest total mass (ties go to
/// the class of larger values). The retained mass is at least the eligible mass
/// divided by the number of occupied classes.
pub fn dyadic_pigeonhole(values: &[f64], masses: &[f64], scale: f64, reference: f64) -> Result<DyadicClass> {
    if values.len() != masses.len() {
        return Err(Error::InvalidParameter("values and masses differ in length".into()));
    }
    if values.iter().chain(masses).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if values.iter().any(|&v| !(v > 0.0)) || masses.iter().any(|&m| m < 0.0) {
        return Err(Error::InvalidParameter("values must be positive and masses nonnegative".into()));
    }
    if !(scale > 1.0) || !(reference > 0.0) {
        return Err(Error::InvalidParameter("scale must exceed 1 and the reference must be positive".into()));
    }
    let floor = scale.powf(-FLOOR_EXPONENT) * reference;
    let class_count = (FLOOR_EXPONENT * scale.log2()).floor() as usize + 1;
    let total_mass: f64 = masses.iter().sum();
    let eligible: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= floor).collect();
    let top = eligible.iter().map(|&i| values[i]).fold(0.0, f64::max);
    if eligible.is_empty() {
        return Err(Error::AllBelowFloor);
    }
    let mut classes: BTreeMap<u32, (f64, Vec<usize>)> = BTreeMap::new();
    for &i in &eligible {
        let k = (top / values[i]).log2().floor().max(0.0) as u32;
        let entry = classes.entry(k).or_insert((0.0, Vec::new()));
        entry.0 += masses[i];
        entry.1.push(i);
    }
    let eligible_mass = eligible.iter().map(|&i| masses[i]).sum();
    let (&class, (retained_mass, members)) = classes
        .iter()
        .fold(None::<(&u32, &(f64, Vec<usize>))>, |best, cand| match best {
            Some(b) if b.1 .0 >= cand.1 .0 => Some(b),
            _ => Some(cand),
        })
        .expect("at least one class");
    let upper = top * 0.5f64.powi(class as i32);
    Ok(DyadicClass {
        class,
        top,
        lower: 0.5 * upper,
        upper,
        members: members.clone(),
        retained_mass: *retained_mass,
        total_mass,
        eligible_mass,
        class_count,
        dropped: values.len() - eligible.len(),
    })
}

/// A tube `S` inside a box: its `L^6(S)` norm, its strip and the cubes of `Y` it covers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeRecord {
    pub norm: f64,
    pub strip: i64,
    pub cubes: Vec<CubeIndex>,
}

/// A box with its data norm `||f_box||_2` and its tubes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub mass: f64,
    pub tubes: Vec<TubeRecord>,
}

/// Outcome of the magnitude / strip-count / box-size / multiplicity pigeonholing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PigeonholeSelection {
    /// Class of tube norms; members index the tubes in box-major order.
    pub lambda: DyadicClass,
    /// Class of per-strip tube counts among the `lambda` tubes (`sigma_box ~ eta.top`).
    pub eta: DyadicClass,
    /// Class of box norms among boxes with a nonempty `Y_box`.
    pub box_class: DyadicClass,
    /// Class of cube multiplicities (number of selected `Y_box` containing a cube).
    pub mu: DyadicClass,
    pub selected_boxes: Vec<usize>,
    /// `Y_box` for every selected box, in the order of `selected_boxes`.
    pub box_unions: Vec<CubeUnion>,
    pub surviving_cubes: CubeUnion,
    /// Cubes of `Y` lying in at least one selected `Y_box`.
    pub covered_cubes: usize,
    /// Guaranteed lower bound for `|Y'| / |Y|`: `covered / (|Y| (1 + log2 |B|))`.
    pub guarantee: f64,
}

/// Selects `lambda`, `eta`, the boxes `B` and the multiplicity class `mu`, producing
/// the surviving cubes `Y'` of `y`.
pub fn pigeonhole_selection(boxes: &[BoxRecord], y: &CubeUnion) -> Result<PigeonholeSelection> {
    let scale = y.scale;
    let flat: Vec<(usize, &TubeRecord)> =
        boxes.iter().enumerate().flat_map(|(b, r)| r.tubes.iter().map(move |t| (b, t))).collect();
    if flat.is_empty() {
        return Err(Error::DegenerateInput("no tubes to pigeonhole".into()));
    }
    let norms: Vec<f64> = flat.iter().map(|(_, t)| t.norm).collect();
    let sixth: Vec<f64> = norms.iter().map(|n| n.powi(6)).collect();
    let reference = norms.iter().copied().fold(0.0, f64::max);
    let lambda = dyadic_pigeonhole(&norms, &sixth, scale, reference)?;

    let mut strip_counts: BTreeMap<(usize, i64), usize> = BTreeMap::new();
    for &i in &lambda.members {
        *strip_counts.entry((flat[i].0, flat[i].1.strip)).or_insert(0) += 1;
    }
    let counts: Vec<f64> = lambda.members.iter().map(|&i| strip_counts[&(flat[i].0, flat[i].1.strip)] as f64).collect();
    let member_mass: Vec<f64> = lambda.members.iter().map(|&i| sixth[i]).collect();
    let top_count = counts.iter().copied().fold(0.0, f64::max);
    let eta_local = dyadic_pigeonhole(&counts, &member_mass, scale, top_count)?;
    let chosen: Vec<usize> = eta_local.members.iter().map(|&k| lambda.members[k]).collect();
    let eta = DyadicClass { members: chosen.clone(), ..eta_local };

    let mut unions: BTreeMap<usize, BTreeSet<CubeIndex>> = BTreeMap::new();
    for &i in &chosen {
        let set = unions.entry(flat[i].0).or_default();
        set.extend(flat[i].1.cubes.iter().copied().filter(|c| y.contains_cube(*c)));
    }
    unions.retain(|_, s| !s.is_empty());
    if unions.is_empty() {
        return Err(Error::DegenerateInput("selected tubes cover no cube of Y".into()));
    }
    let candidates: Vec<usize> = unions.keys().copied().collect();
    let box_norms: Vec<f64> = candidates.iter().map(|&b| boxes[b].mass).collect();
    let box_mass: Vec<f64> = box_norms.iter().map(|m| m * m).collect();
    let top_box = box_norms.iter().copied().fold(0.0, f64::max);
    let box_local = dyadic_pigeonhole(&box_norms, &box_mass, scale, top_box)?;
    let selected_boxes: Vec<usize> = box_local.members.iter().map(|&k| candidates[k]).collect();
    let box_class = DyadicClass { members: selected_boxes.clone(), ..box_local };

    let mut multiplicity: BTreeMap<CubeIndex, usize> = BTreeMap::new();
    for b in &selected_boxes {
        for c in &unions[b] {
            *multiplicity.entry(*c).or_insert(0) += 1;
        }
    }
    let covered: Vec<(CubeIndex, usize)> = multiplicity.into_iter().collect();
    let mult: Vec<f64> = covered.iter().map(|&(_, m)| m as f64).collect();
    let ones = vec![1.0; mult.len()];
    let top_mult = mult.iter().copied().fold(0.0, f64::max);
    let mu = dyadic_pigeonhole(&mult, &ones, scale, top_mult)?;
    let surviving_cubes = CubeUnion::new(y.spatial_dim, scale, mu.members.iter().map(|&k| covered[k].0))?;
    let box_unions = selected_boxes
        .iter()
        .map(|b| CubeUnion::new(y.spatial_dim, scale, unions[b].iter().copied()))
        .collect::<Result<Vec<_>>>()?;
    let guarantee = covered.len() as f64 / (y.len().max(1) as f64 * (1.0 + (selected_boxes.len() as f64).log2()));
    Ok(PigeonholeSelection {
        lambda,
        eta,
        box_class,
        mu,
        selected_boxes,
        box_unions,
        surviving_cubes,
        covered_cubes: covered.len(),
        guarantee,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_values_form_one_class() {
        let v = vec![3.0; 7];
        let c = dyadic_pigeonhole(&v, &v, 1024.0, 3.0).unwrap();
        assert_eq!(c.members.len(), 7);
        assert_eq!(c.class, 0);
        assert_eq!(c.retained_fraction(), 1.0);
    }

    #[test]
    fn powers_of_two_with_equal_weights() {
        let k = 9;
        let v: Vec<f64> = (0..=k).map(|i| 2f64.powi(i)).collect();
        let w = vec![1.0; v.len()];
        let c = dyadic_pigeonhole(&v, &w, 1024.0, v[k as usize]).unwrap();
        assert_eq!(c.members.len(), 1);
        assert!(c.retained_fraction() >= 1.0 / (k as f64 + 1.0));
        assert_eq!(c.members, vec![k as usize]);
    }

    #[test]
    fn floor_drops_tiny_values() {
        let r: f64 = 16.0;
        let v = [1.0, r.powf(-FLOOR_EXPONENT) * 0.5];
        let c = dyadic_pigeonhole(&v, &v, r, 1.0).unwrap();
        assert_eq!(c.dropped, 1);
        assert_eq!(c.class_count, 81);
        assert!(matches!(dyadic_pigeonhole(&[1e-30], &[1.0], r, 1.0), Err(Error::AllBelowFloor)));
    }

    #[test]
    fn members_within_factor_two() {
        let v = [1.0, 0.6, 0.51, 0.5, 0.26, 0.9];
        let c = dyadic_pigeonhole(&v, &[1.0; 6], 64.0, 1.0).unwrap();
        let vals: Vec<f64> = c.members.iter().map(|&i| v[i]).collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi <= 2.0 * lo);
        assert_eq!(c.members, vec![0, 1, 2, 5]);
    }
}
