use super::{LinExpr, MilpModel, Sense};

/// Replaces every SOS-2 set by segment-selection binaries.
///
/// For a set `w_0..w_{n-1}` this adds binaries `z_0..z_{n-2}` (segment `s`
/// spans members `s` and `s+1`), one row `sum z = 1` and, per member, the
/// links `lb_i * (z_{i-1} + z_i) <= w_i <= ub_i * (z_{i-1} + z_i)`; the lower
/// link is only emitted for members with a negative lower bound. New
/// variables are appended after the existing ones.
pub fn reformulate_sos2_as_binary(model: &MilpModel) -> MilpModel {
    let mut out = model.clone();
    out.sos2.clear();
    for set in &model.sos2 {
        let n = set.members.len();
        let segments: Vec<_> = (0..n - 1)
            .map(|s| out.binary(format!("{}_seg{s}", set.name)))
            .collect();
        let one = segments
            .iter()
            .fold(LinExpr::new(), |e, &z| e.term(z, 1.0));
        out.add_constraint(format!("{}_one", set.name), one, Sense::Eq, 1.0);

        for (i, &member) in set.members.iter().enumerate() {
            let adjacent: Vec<_> = [i.checked_sub(1), (i < n - 1).then_some(i)]
                .into_iter()
                .flatten()
                .map(|s| segments[s])
                .collect();
            let var = model.var(member);
            let link = |bound: f64| {
                adjacent
                    .iter()
                    .fold(LinExpr::from(member), |e, &z| e.term(z, -bound))
            };
            out.add_constraint(format!("{}_link{i}", set.name), link(var.upper), Sense::Le, 0.0);
            if var.lower < 0.0 {
                out.add_constraint(format!("{}_linklo{i}", set.name), link(var.lower), Sense::Ge, 0.0);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::VarKind;
    use super::*;

    #[test]
    fn no_sets_is_identity() {
        let mut m = MilpModel::new();
        let x = m.continuous("x", 0.0, 2.0);
        m.add_constraint("c", x.into(), Sense::Le, 1.0);
        m.set_objective(x.into());
        assert_eq!(reformulate_sos2_as_binary(&m), m);
    }

    #[test]
    fn five_weights_give_four_segments() {
        let mut m = MilpModel::new();
        let w: Vec<_> = (0..5).map(|i| m.continuous(format!("w{i}"), 0.0, 1.0)).collect();
        m.add_sos2("s", w);
        let r = reformulate_sos2_as_binary(&m);
        assert!(r.sos2.is_empty());
        assert_eq!(r.num_vars(), 5 + 4);
        assert_eq!(r.variables[5..].iter().filter(|v| v.kind == VarKind::Binary).count(), 4);
        // sum-to-one plus one link per member.
        assert_eq!(r.constraints.len(), 1 + 5);
        assert_eq!(r.constraints[0].name, "s_one");
        // Interior members link to both neighbouring segments.
        assert_eq!(r.constraints[3].terms.len(), 3);
        assert_eq!(r.constraints[1].terms.len(), 2);
        assert_eq!(r.constraints[5].terms.len(), 2);
    }

    #[test]
    fn negative_lower_bounds_get_lower_links() {
        let mut m = MilpModel::new();
        let w: Vec<_> = (0..3).map(|i| m.continuous(format!("w{i}"), -1.0, 1.0)).collect();
        m.add_sos2("s", w);
        let r = reformulate_sos2_as_binary(&m);
        assert_eq!(r.constraints.len(), 1 + 3 + 3);
    }
}
