//! CSV exports for weight tables, polynomial energies and order profiles.
//!
//! Real numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64`. Subsets are dash-joined 0-based site indices; the
//! constant term has an empty subset field.

use super::{OrderStats, PolyEnergy, WeightTable};
use crate::spin::SpinConfig;
use std::fmt::Write;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `index,config,weight`, one row per basis state in index order.
pub fn weights_csv(w: &WeightTable) -> String {
    let mut out = String::from("index,config,weight\n");
    for (idx, &v) in w.weights().iter().enumerate() {
        let s = SpinConfig::from_index(idx, w.n());
        writeln!(out, "{idx},{},{}", s.to_pm_string(), num(v)).unwrap();
    }
    out
}

/// `owner,order,subset,coefficient` for a set of polynomials, sorted by
/// owner, subset size, then subset.
pub fn poly_csv(polys: &[PolyEnergy]) -> String {
    let mut out = String::from("owner,order,subset,coefficient\n");
    let mut sorted: Vec<&PolyEnergy> = polys.iter().collect();
    sorted.sort_by_key(|p| p.owner);
    for p in sorted {
        for (set, c) in p.sorted_terms() {
            let subset = set.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("-");
            writeln!(out, "{},{},{},{}", p.owner, set.len(), subset, num(c)).unwrap();
        }
    }
    out
}

/// `site,order,count,max_abs,l1`; `site` is a conditional index or `all`.
pub fn order_profile_csv(per_site: &[(usize, Vec<OrderStats>)], aggregate: &[OrderStats]) -> String {
    let mut out = String::from("site,order,count,max_abs,l1\n");
    let rows = per_site
        .iter()
        .flat_map(|(site, prof)| prof.iter().map(move |o| (site.to_string(), o)))
        .chain(aggregate.iter().map(|o| ("all".to_string(), o)));
    for (site, o) in rows {
        writeln!(out, "{site},{},{},{},{}", o.order, o.count, num(o.max_abs), num(o.l1)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn poly_rows_sorted_and_exact() {
        let mut terms = BTreeMap::new();
        terms.insert(vec![2, 3], 0.1);
        terms.insert(vec![], 1.0 / 3.0);
        terms.insert(vec![3], -2.5e-7);
        let csv = poly_csv(&[PolyEnergy { owner: 1, n: 4, max_order: 2, terms }]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "owner,order,subset,coefficient");
        assert!(lines[1].starts_with("1,0,,"));
        assert!(lines[2].starts_with("1,1,3,"));
        assert!(lines[3].starts_with("1,2,2-3,"));
        let c: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(c, 1.0 / 3.0);
    }

    #[test]
    fn weights_rows() {
        let w = WeightTable::new(1, vec![0.75, 0.25]).unwrap();
        assert_eq!(weights_csv(&w), "index,config,weight\n0,+,7.5000000000000000e-1\n1,-,2.5000000000000000e-1\n");
    }
}
