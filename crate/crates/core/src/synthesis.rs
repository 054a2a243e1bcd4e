use std::collections::HashMap;

use rayon::prelude::*;

use crate::coloring::Coloring;
use crate::confusion::ConfusionGraph;
use crate::error::{Error, Result};
use crate::network::AutomataNetwork;
use crate::schedule::Schedule;
use crate::space::ceil_log;

/// A machine-checked sequentialization: `(f, w)` over `n + k` automata
/// computes `h` on the first `n` coordinates, `pr ∘ f^w = h ∘ pr`,
/// verified exhaustively over all `q^(n+k)` inputs at construction.
#[derive(Debug, Clone)]
pub struct SequentializationCertificate {
    base: AutomataNetwork,
    seq: AutomataNetwork,
    order: Schedule,
    extra: usize,
}

impl SequentializationCertificate {
    pub fn new(base: AutomataNetwork, seq: AutomataNetwork, order: Schedule) -> Result<Self> {
        if !verify_sequentialization(&base, &seq, &order)? {
            return Err(Error::Verification(
                "pr ∘ f^w differs from h ∘ pr on some input".to_string(),
            ));
        }
        let extra = seq.n() - base.n();
        Ok(SequentializationCertificate { base, seq, order, extra })
    }

    /// The sequentialized network `h`.
    pub fn base(&self) -> &AutomataNetwork {
        &self.base
    }

    /// The sequential network `f` over `n + k` automata.
    pub fn seq(&self) -> &AutomataNetwork {
        &self.seq
    }

    /// The update order `w` over all `n + k` automata.
    pub fn order(&self) -> &Schedule {
        &self.order
    }

    /// Number of extra automata `k`.
    pub fn extra(&self) -> usize {
        self.extra
    }

    /// Replays the exhaustive check.
    pub fn verify(&self) -> Result<bool> {
        verify_sequentialization(&self.base, &self.seq, &self.order)
    }
}

/// Exhaustive check that `(f, w)` sequentializes `h`.
pub fn verify_sequentialization(
    h: &AutomataNetwork,
    f: &AutomataNetwork,
    w: &Schedule,
) -> Result<bool> {
    if f.q() != h.q() {
        return Err(Error::input(format!(
            "alphabet mismatch: h has q={}, f has q={}",
            h.q(),
            f.q()
        )));
    }
    if f.n() < h.n() {
        return Err(Error::input(format!(
            "f has {} automata, fewer than h's {}",
            f.n(),
            h.n()
        )));
    }
    if w.len() != f.n() {
        return Err(Error::input(format!(
            "order length {} does not match f's size {}",
            w.len(),
            f.n()
        )));
    }
    let visible = h.space().size();
    let ok = (0..f.space().size())
        .into_par_iter()
        .try_fold(
            || true,
            |acc, z| -> Result<bool> {
                if !acc {
                    return Ok(false);
                }
                let out = f.update_schedule(w, z)?;
                Ok(out % visible == h.apply(z % visible)?)
            },
        )
        .try_reduce(|| true, |a, b| Ok(a && b))?;
    Ok(ok)
}

/// Constructive upper direction: from a proper coloring of `G_{h,u}` with
/// `C` colors, build `(f, w)` with `k = ceil(log_q C)` extra automata.
///
/// The extra automata copy the color digits first; then each original
/// coordinate `u_i` recovers, from the visible prefix state and the
/// stored color, a preimage consistent with the run so far and applies
/// `h_{u_i}` to it. States reachable from no input keep their value.
pub fn synthesize_from_coloring(
    h: &AutomataNetwork,
    u: &Schedule,
    coloring: &Coloring,
) -> Result<SequentializationCertificate> {
    let n = h.n();
    let q = h.q();
    let space = h.space();
    let size = space.size();
    if u.len() != n {
        return Err(Error::input("schedule length does not match network size"));
    }
    if coloring.colors().len() != size {
        return Err(Error::input("coloring does not cover the configuration space"));
    }
    let graph = ConfusionGraph::build(h, u)?;
    if !coloring.is_proper(&graph) {
        return Err(Error::input("coloring is not proper for the confusion graph"));
    }

    let k = ceil_log(q, coloring.count() as u64) as usize;
    let m = n + k;
    let mut order: Vec<usize> = (n..m).collect();
    order.extend_from_slice(u.order());
    let w = Schedule::new(order)?;

    let fspace = crate::space::Space::new(m, q)?;
    let mut table: Vec<u32> = (0..fspace.size()).map(|z| z as u32).collect();

    // extra automata copy the color digits of the visible part
    for z in 0..fspace.size() {
        let x = z % size;
        let mut y = table[z] as usize;
        let mut color = coloring.color(x) as usize;
        for j in 0..k {
            y = fspace.with_digit(y, n + j, (color % q as usize) as u32);
            color /= q as usize;
        }
        table[z] = y as u32;
    }

    // each original coordinate recovers a preimage from (prefix state, color)
    let mut traj: Vec<u32> = (0..size as u32).collect();
    for step in 0..n {
        let coord = u.at(step);
        let mut recovered: HashMap<(u32, u32), u32> = HashMap::with_capacity(size);
        for x in 0..size {
            let key = (traj[x], coloring.color(x));
            let digit = h.coordinate(coord, x);
            match recovered.entry(key) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(digit);
                }
                std::collections::hash_map::Entry::Occupied(e) => {
                    if *e.get() != digit {
                        // two preimages merged under equal colors would be a
                        // confusion edge inside a color class
                        return Err(Error::internal(
                            "preimage set disagrees on the next digit".to_string(),
                        ));
                    }
                }
            }
        }
        for z in 0..fspace.size() {
            let key = ((z % size) as u32, (z / size) as u32);
            let digit = if step == 0 {
                // the first preimage set is the visible state itself
                h.coordinate(coord, z % size)
            } else {
                match recovered.get(&key) {
                    Some(&d) => d,
                    None => fspace.digit(z, coord),
                }
            };
            table[z] = fspace.with_digit(table[z] as usize, coord, digit) as u32;
        }
        for x in 0..size {
            traj[x] = space.with_digit(traj[x] as usize, coord, h.coordinate(coord, x)) as u32;
        }
    }

    // colors beyond the count never occur, so z/size indexes colors exactly
    let f = AutomataNetwork::from_table(m, q, table)?;
    SequentializationCertificate::new(h.clone(), f, w)
        .map_err(|e| Error::internal(format!("constructed certificate failed: {e}")))
}

/// Lower direction: any certificate whose order respects `u` yields a
/// proper coloring of `G_{h,u}` — color each `x` by the final extra
/// digits of the run started at `x` padded with zeros.
pub fn coloring_from_certificate(
    u: &Schedule,
    cert: &SequentializationCertificate,
) -> Result<Coloring> {
    if !cert.order().respects(u) {
        return Err(Error::input(
            "certificate order does not respect the target schedule",
        ));
    }
    let h = cert.base();
    let f = cert.seq();
    let size = h.space().size();
    let mut raw = Vec::with_capacity(size);
    for x in 0..size {
        // x viewed inside f's space is exactly x with zero-padded extras
        let out = f.update_schedule(cert.order(), x)?;
        raw.push((out / size) as u32);
    }
    let coloring = Coloring::new(raw);
    let graph = ConfusionGraph::build(h, u)?;
    if !coloring.is_proper(&graph) {
        return Err(Error::internal(
            "extracted coloring is improper; certificate cannot be valid".to_string(),
        ));
    }
    Ok(coloring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{exact_chromatic_number, kappa};
    use crate::witnesses;

    #[test]
    fn respects_reads_off_the_orders() {
        let u = Schedule::canonical(6);
        let w = Schedule::from_one_based(&[7, 8, 9, 1, 2, 3, 4, 5, 6]).unwrap();
        let v = Schedule::from_one_based(&[7, 1, 4, 2, 5, 3, 6]).unwrap();
        assert!(w.respects(&u));
        assert!(!v.respects(&u));
        assert!(u.respects(&u));
    }

    #[test]
    fn verify_rejects_size_mismatch() {
        let h = witnesses::swap_network(4, 2).unwrap();
        let f = witnesses::swap_network(2, 2).unwrap();
        let w = Schedule::canonical(2);
        assert!(matches!(
            verify_sequentialization(&h, &f, &w),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn swap_is_not_sequentialized_by_itself() {
        let h = witnesses::swap_network(2, 2).unwrap();
        for order in [vec![0, 1], vec![1, 0]] {
            let w = Schedule::new(order).unwrap();
            assert!(!verify_sequentialization(&h, &h, &w).unwrap());
        }
    }

    #[test]
    fn example1_paper_certificates_verify() {
        let ex = witnesses::example1(2).unwrap();
        assert!(verify_sequentialization(&ex.h, &ex.f, &ex.w).unwrap());
        assert!(verify_sequentialization(&ex.h, &ex.g, &ex.v).unwrap());
    }

    #[test]
    fn identity_synthesizes_with_zero_extras() {
        let h = AutomataNetwork::identity(3, 2).unwrap();
        let u = Schedule::canonical(3);
        let g = ConfusionGraph::build(&h, &u).unwrap();
        let c = exact_chromatic_number(&g).unwrap();
        assert_eq!(c.count(), 1);
        let cert = synthesize_from_coloring(&h, &u, &c).unwrap();
        assert_eq!(cert.extra(), 0);
        assert!(cert.verify().unwrap());
    }

    #[test]
    fn swap2_synthesizes_with_one_extra() {
        let h = witnesses::swap_network(2, 2).unwrap();
        let u = Schedule::canonical(2);
        let g = ConfusionGraph::build(&h, &u).unwrap();
        let c = exact_chromatic_number(&g).unwrap();
        assert_eq!(c.count(), 2);
        let cert = synthesize_from_coloring(&h, &u, &c).unwrap();
        assert_eq!(cert.extra(), 1);
        assert!(cert.verify().unwrap());
    }

    #[test]
    fn example1_synthesizes_with_three_extras() {
        let h = witnesses::swap_network(6, 2).unwrap();
        let u = Schedule::canonical(6);
        let g = ConfusionGraph::build(&h, &u).unwrap();
        let c = exact_chromatic_number(&g).unwrap();
        let cert = synthesize_from_coloring(&h, &u, &c).unwrap();
        assert_eq!(cert.extra(), kappa(&h, &u).unwrap() as usize);
        assert_eq!(cert.extra(), 3);
    }

    #[test]
    fn synthesis_rejects_improper_colorings() {
        let h = witnesses::swap_network(2, 2).unwrap();
        let u = Schedule::canonical(2);
        let c = Coloring::new(vec![0; 4]);
        assert!(matches!(
            synthesize_from_coloring(&h, &u, &c),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn coloring_extraction_from_paper_certificate() {
        let ex = witnesses::example1(2).unwrap();
        let u = Schedule::canonical(6);
        let cert =
            SequentializationCertificate::new(ex.h.clone(), ex.f.clone(), ex.w.clone()).unwrap();
        let c = coloring_from_certificate(&u, &cert).unwrap();
        assert!(c.count() <= 8);
        let g = ConfusionGraph::build(&ex.h, &u).unwrap();
        assert!(c.is_proper(&g));
    }

    #[test]
    fn coloring_extraction_requires_respect() {
        let ex = witnesses::example1(2).unwrap();
        let u = Schedule::canonical(6);
        let cert =
            SequentializationCertificate::new(ex.h.clone(), ex.g.clone(), ex.v.clone()).unwrap();
        assert!(matches!(
            coloring_from_certificate(&u, &cert),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn round_trip_synthesize_then_extract() {
        let h = witnesses::swap_network(4, 2).unwrap();
        let u = Schedule::canonical(4);
        let g = ConfusionGraph::build(&h, &u).unwrap();
        let c = exact_chromatic_number(&g).unwrap();
        let cert = synthesize_from_coloring(&h, &u, &c).unwrap();
        let back = coloring_from_certificate(&u, &cert).unwrap();
        assert!(back.is_proper(&g));
        assert!(back.count() as u64 <= (h.q() as u64).pow(cert.extra() as u32));
    }

    #[test]
    fn zero_extra_certificate_means_edgeless_graph() {
        let h = AutomataNetwork::identity(2, 2).unwrap();
        let u = Schedule::canonical(2);
        let g = ConfusionGraph::build(&h, &u).unwrap();
        let c = exact_chromatic_number(&g).unwrap();
        let cert = synthesize_from_coloring(&h, &u, &c).unwrap();
        assert_eq!(cert.extra(), 0);
        let back = coloring_from_certificate(&u, &cert).unwrap();
        assert_eq!(back.count(), 1);
        assert!(g.is_edgeless());
    }
}
