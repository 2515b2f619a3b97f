//! Command execution. Every command builds a [`Report`] and a status.

use std::collections::BTreeSet;
use std::result::Result;

use nested_mzi::*;

use crate::config::RunConfig;
use crate::report::{fmt_complex, fmt_g, Report, Row};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    /// Chain-ket overlaps of a named family; the config family if `None`.
    Consistency {
        family: Option<NamedFamilyId>,
    },
    Probs {
        family: Option<NamedFamilyId>,
    },
    /// Pr(query at `time` | S0, final event at the last time).
    Infer {
        time: usize,
        channels: Vec<String>,
        given: Vec<String>,
    },
    WeakValues {
        given: String,
    },
    Probes,
    /// Coincidence lists per detector group, e.g. `[[F, G], [H]]`.
    Coincidences {
        detectors: Vec<Vec<String>>,
    },
    Sample,
    PaperSuite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    SuiteMismatch,
    /// The requested quantity is undefined because its family is inconsistent.
    Meaningless,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Self::Success => 0,
            Self::SuiteMismatch => 3,
            Self::Meaningless => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub status: Status,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self {
            report,
            status: Status::Success,
        }
    }
}

/// `t2` or `2`.
pub fn parse_time(s: &str) -> Result<usize, CliError> {
    let digits = s.trim().trim_start_matches(['t', 'T']);
    digits
        .parse()
        .map_err(|_| CliError::Usage(format!("bad time `{s}` (expected e.g. t2)")))
}

/// `B+C`, `B,C` or `C`.
pub fn parse_channels(s: &str) -> Vec<String> {
    s.split(['+', ','])
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.to_ascii_uppercase())
        .collect()
}

/// `F+G,H` → `[[F, G], [H]]`.
pub fn parse_detector_groups(s: &str) -> Vec<Vec<String>> {
    s.split(',')
        .map(parse_channels)
        .filter(|g| !g.is_empty())
        .collect()
}

fn family_tag(id: NamedFamilyId) -> &'static str {
    match id {
        NamedFamilyId::Eq8Full => "Eq. 8",
        NamedFamilyId::Eq12Detectors => "Eq. 12",
        NamedFamilyId::FA => "Eq. 13",
        NamedFamilyId::FAPrime => "Eq. 14",
        NamedFamilyId::FB => "Eq. 17",
        NamedFamilyId::FAbc => "Eq. 19",
        NamedFamilyId::FC => "Eq. 20",
        NamedFamilyId::Eq25Backward => "Eq. 25",
        NamedFamilyId::Eq26NoBs34 => "Eq. 26",
    }
}

fn model(cfg: &RunConfig) -> Result<Dynamics, CliError> {
    Ok(build_nested_mzi(cfg.params())?)
}

fn basis(d: &Dynamics, t: usize, label: &str) -> Result<Ket, CliError> {
    Ok(Ket::basis(d.slice(t)?.clone(), label)?)
}

fn labels_projector(d: &Dynamics, t: usize, labels: &[String]) -> Result<Projector, CliError> {
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    Ok(Projector::from_labels(d.slice(t)?, &refs)?)
}

fn header(cfg: &RunConfig) -> String {
    format!("alpha2 = {}", fmt_g(cfg.alpha2))
}

pub fn run_report(cfg: &RunConfig, command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Consistency { family } => consistency(cfg, family.unwrap_or(cfg.family)),
        Command::Probs { family } => probs(cfg, family.unwrap_or(cfg.family)),
        Command::Infer {
            time,
            channels,
            given,
        } => infer_cmd(cfg, *time, channels, given),
        Command::WeakValues { given } => weak_values(cfg, given),
        Command::Probes => probes(cfg),
        Command::Coincidences { detectors } => coincidences(cfg, detectors),
        Command::Sample => sample_cmd(cfg),
        Command::PaperSuite => paper_suite(cfg),
    }
}

fn consistency(cfg: &RunConfig, id: NamedFamilyId) -> Result<Outcome, CliError> {
    let (d, fam) = named_family(id, cfg.params())?;
    let r = consistency_check(&d, &fam, cfg.tolerance)?;
    let tag = family_tag(id);
    let mut rep = Report::new(format!("consistency {id}, {}", header(cfg)));
    if r.consistent {
        rep.note(format!("consistent, max overlap {}", fmt_g(r.max_overlap)));
    } else {
        rep.note(format!("inconsistent, overlap {}", fmt_g(r.max_overlap)));
    }
    rep.push(Row::real(
        "consistent",
        id.name(),
        if r.consistent { 1.0 } else { 0.0 },
        tag,
    ));
    rep.push(Row::real("max_overlap", id.name(), r.max_overlap, tag));
    for (i, j, ip) in &r.offending_pairs {
        rep.push(Row::complex(
            "chain_overlap",
            format!("{} | {}", fam.history_label(*i), fam.history_label(*j)),
            *ip,
            tag,
        ));
    }
    Ok(Outcome::ok(rep))
}

fn probs(cfg: &RunConfig, id: NamedFamilyId) -> Result<Outcome, CliError> {
    let (d, fam) = named_family(id, cfg.params())?;
    let tag = family_tag(id);
    let mut rep = Report::new(format!("probabilities {id}, {}", header(cfg)));
    match born_probabilities(&d, &fam, cfg.tolerance) {
        Ok(w) => {
            for (i, p) in w.iter().enumerate() {
                rep.push(Row::real("Pr", fam.history_label(i), *p, tag));
            }
            rep.note(format!("total {}", fmt_g(w.iter().sum())));
            Ok(Outcome::ok(rep))
        }
        Err(Error::Inconsistent(r)) => {
            rep.note(format!(
                "inconsistent family, probabilities undefined (overlap {})",
                fmt_g(r.max_overlap)
            ));
            rep.push(Row::real("max_overlap", id.name(), r.max_overlap, tag));
            Ok(Outcome {
                report: rep,
                status: Status::Meaningless,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn infer_cmd(
    cfg: &RunConfig,
    time: usize,
    channels: &[String],
    given: &[String],
) -> Result<Outcome, CliError> {
    let d = model(cfg)?;
    let last = d.final_time();
    if time == 0 || time >= last {
        return Err(CliError::Usage(format!(
            "query time must be an intermediate time t1..t{}",
            last - 1
        )));
    }
    let query = labels_projector(&d, time, channels)?;
    let fin = labels_projector(&d, last, given)?;
    let s0 = basis(&d, 0, "S")?;
    let condition = format!("{} | S0, {}", query.name(), fin.name());
    let mut rep = Report::new(format!("infer {condition}, {}", header(cfg)));
    match infer(&d, &s0, &fin, &query, cfg.tolerance)? {
        InferenceVerdict::Defined(p) => {
            rep.note(format!("Defined, Pr = {}", fmt_g(p)));
            rep.push(Row::real("Pr", condition, p, ""));
            Ok(Outcome::ok(rep))
        }
        InferenceVerdict::Incommensurate(r) => {
            rep.note(format!(
                "Incommensurate, {{P, I-P}} family inconsistent (overlap {})",
                fmt_g(r.max_overlap)
            ));
            for (_, _, ip) in &r.offending_pairs {
                rep.push(Row::complex("chain_overlap", condition.clone(), *ip, ""));
            }
            Ok(Outcome {
                report: rep,
                status: Status::Meaningless,
            })
        }
    }
}

fn verdict_name(v: PresenceVerdict) -> &'static str {
    match v {
        PresenceVerdict::Present => "present",
        PresenceVerdict::Absent => "absent",
        PresenceVerdict::Meaningless => "meaningless",
    }
}

fn weak_values(cfg: &RunConfig, given: &str) -> Result<Outcome, CliError> {
    let d = model(cfg)?;
    let last = d.final_time();
    let s0 = basis(&d, 0, "S")?;
    let fin = basis(&d, last, given)?;
    let channels: Vec<Projector> = (1..last)
        .flat_map(|t| Pdi::channels(&d.slices()[t]).into_parts())
        .collect();
    let rows = presence_table(&d, &s0, &fin, &channels, cfg.tolerance)?;
    let mut rep = Report::new(format!(
        "weak values given S0, {given}{last}, {}",
        header(cfg)
    ));
    for r in rows {
        rep.push(Row::complex(
            format!("<{}>_w", r.channel),
            format!("tsvf {}, ch {}", verdict_name(r.tsvf), verdict_name(r.ch)),
            r.weak_value,
            if r.time == 2 { "Eq. 38" } else { "" },
        ));
    }
    Ok(Outcome::ok(rep))
}

fn evolve(cfg: &RunConfig, d: &Dynamics, ids: &str) -> Result<JointState, CliError> {
    let probes = ProbeSpec::builtin_set(ids)?;
    Ok(evolve_with_probes(
        d,
        &probes,
        cfg.strength(),
        &basis(d, 0, "S")?,
    )?)
}

fn probes(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = model(cfg)?;
    let js = evolve(cfg, &d, &cfg.probes)?;
    let mut rep = Report::new(format!(
        "probes {}, epsilon = {}, {}",
        cfg.probes,
        fmt_g(cfg.epsilon),
        header(cfg)
    ));
    rep.note(format!("joint norm {}", fmt_g(js.norm_squared())));
    for b in branch_components(&js, cfg.tolerance) {
        for label in js.slice().labels() {
            let amp = b.phi.amplitude(label.as_str())?;
            rep.push(Row::complex(
                format!("Phi^{}", b.label),
                format!("{label}{}", js.slice().time_index()),
                amp,
                "",
            ));
        }
    }
    let dist = outcome_distribution(&js, &Pdi::channels(js.slice()))?;
    let threshold = cfg.tolerance * cfg.tolerance;
    for o in dist.outcomes().iter().filter(|o| o.probability > threshold) {
        rep.push(Row::real(
            "Pr",
            format!("{},{}", o.detector, o.label),
            o.probability,
            "",
        ));
    }
    Ok(Outcome::ok(rep))
}

fn coincidences(cfg: &RunConfig, groups: &[Vec<String>]) -> Result<Outcome, CliError> {
    let d = model(cfg)?;
    let js = evolve(cfg, &d, &cfg.probes)?;
    let group_refs: Vec<Vec<&str>> = groups
        .iter()
        .map(|g| g.iter().map(String::as_str).collect())
        .collect();
    let slices: Vec<&[&str]> = group_refs.iter().map(Vec::as_slice).collect();
    let pdi = Pdi::from_label_groups(js.slice(), &slices)?;
    let dist = outcome_distribution(&js, &pdi)?;
    let mut rep = Report::new(format!(
        "coincidences, probes {}, epsilon = {}, {}",
        cfg.probes,
        fmt_g(cfg.epsilon),
        header(cfg)
    ));
    let threshold = cfg.tolerance * cfg.tolerance;
    for (det, labels) in coincidence_support(&dist, cfg.tolerance) {
        rep.note(format!("{det}: {}", labels.join(" ")));
        let k = dist
            .detectors()
            .iter()
            .position(|x| *x == det)
            .expect("listed detector");
        let mut outs: Vec<_> = dist
            .outcomes()
            .iter()
            .filter(|o| o.detector == dist.detectors()[k] && o.probability > threshold)
            .collect();
        outs.sort_by_key(|o| (o.kappa.excited(), o.kappa));
        for o in outs {
            rep.push(Row::real(
                "Pr",
                format!("{det},{}", o.label),
                o.probability,
                "",
            ));
        }
    }
    Ok(Outcome::ok(rep))
}

fn sample_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = model(cfg)?;
    let js = evolve(cfg, &d, &cfg.probes)?;
    let dist = outcome_distribution(&js, &Pdi::channels(js.slice()))?;
    let counts = sample(&dist, cfg.samples, cfg.seed)?;
    let mut rep = Report::new(format!(
        "sample n = {}, seed = {}, probes {}, epsilon = {}, {}",
        cfg.samples,
        cfg.seed,
        cfg.probes,
        fmt_g(cfg.epsilon),
        header(cfg)
    ));
    let n = cfg.samples as f64;
    for (o, &c) in dist.outcomes().iter().zip(&counts.counts) {
        if c == 0 && o.probability == 0.0 {
            continue;
        }
        let cond = format!("{},{}", o.detector, o.label);
        rep.push(Row::real("count", cond.clone(), c as f64, ""));
        rep.push(Row::real("freq", cond.clone(), c as f64 / n, ""));
        rep.push(Row::real("Pr", cond, o.probability, ""));
    }
    // per-probe firing rate conditioned on each detector
    for det in dist.detectors() {
        let hits = counts.count_where(&dist, &[det.as_str()], |_| true);
        if hits == 0 {
            continue;
        }
        for (i, p) in dist.probes().iter().enumerate() {
            let fired = counts.count_where(&dist, &[det.as_str()], |k| k.contains(i));
            let cond = format!("{} | {det}", p.id());
            let exact = dist
                .conditional(&[det.as_str()], |k| k.contains(i))
                .unwrap_or(0.0);
            let est = fired as f64 / hits as f64;
            let sigma = (exact * (1.0 - exact) / hits as f64).sqrt();
            rep.note(format!(
                "Pr({cond}): empirical {}, exact {}, sigma {}",
                fmt_g(est),
                fmt_g(exact),
                fmt_g(sigma)
            ));
            rep.push(Row::real("Pr_empirical", cond.clone(), est, ""));
            rep.push(Row::real("Pr_exact", cond, exact, ""));
        }
    }
    Ok(Outcome::ok(rep))
}

struct SuiteItem {
    tag: &'static str,
    quantity: String,
    condition: String,
    got: C64,
    want: C64,
}

fn item(
    tag: &'static str,
    quantity: impl Into<String>,
    condition: impl Into<String>,
    got: C64,
    want: f64,
) -> SuiteItem {
    SuiteItem {
        tag,
        quantity: quantity.into(),
        condition: condition.into(),
        got,
        want: C64::new(want, 0.0),
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Expected branch amplitudes on (F, G, H) for the two probe sets with closed
/// forms. `five` selects `a,d,b,c,e`; otherwise `a,d,e,w`.
fn branch_closed_form(alpha2: f64, eps: f64, five: bool) -> Vec<(&'static str, [f64; 3])> {
    let (a, b) = (alpha2.sqrt(), (1.0 - alpha2).sqrt());
    let (z, h) = ((1.0 - eps).sqrt(), eps.sqrt());
    // images of A3 and E3 on the final slice
    let abar = [a, b, 0.0];
    let ebar = [b, -a, 0.0];
    let hv = [0.0, 0.0, 1.0];
    let lin = |x: f64, u: [f64; 3], y: f64, v: [f64; 3]| {
        [
            x * u[0] + y * v[0],
            x * u[1] + y * v[1],
            x * u[2] + y * v[2],
        ]
    };
    let o = lin(z * a, abar, z * z * b, hv);
    let pa = lin(h * a, abar, 0.0, hv);
    let pd = lin(0.0, abar, z * h * b, hv);
    if !five {
        return vec![
            ("o", o),
            ("a", pa),
            ("d", pd),
            ("w", pd),
            ("dw", lin(0.0, abar, h * h * b, hv)),
        ];
    }
    let pb = lin(-0.5 * z * z * h * b, ebar, 0.5 * z * h * b, hv);
    let pc = lin(0.5 * z * z * h * b, ebar, 0.5 * z * h * b, hv);
    let pbe = lin(-0.5 * z * h * h * b, ebar, 0.0, hv);
    let pce = lin(-1.0, pbe, 0.0, hv);
    let r = h / z;
    vec![
        ("o", o),
        ("a", pa),
        ("d", pd),
        ("b", pb),
        ("db", lin(r, pb, 0.0, hv)),
        ("c", pc),
        ("dc", lin(r, pc, 0.0, hv)),
        ("be", pbe),
        ("ce", pce),
        ("dbe", lin(r, pbe, 0.0, hv)),
        ("dce", lin(r, pce, 0.0, hv)),
    ]
}

fn suite_items(cfg: &RunConfig) -> Result<Vec<SuiteItem>, CliError> {
    let p = cfg.params();
    let (a2, b2) = (p.alpha2(), p.beta2());
    let tol = cfg.tolerance;
    let mut out = Vec::new();

    let (d, fam) = named_family(NamedFamilyId::Eq8Full, p)?;
    let w = born_probabilities(&d, &fam, tol)?;
    for (i, want) in [a2 * a2, 0.0, b2 + a2 * b2].into_iter().enumerate() {
        out.push(item("Eq. 10", "Pr", fam.history_label(i), real(w[i]), want));
    }

    let f4 = |d: &Dynamics| labels_projector(d, 4, &["F".into()]);
    let at = |d: &Dynamics, t: usize, l: &str| labels_projector(d, t, &[l.to_string()]);

    let (d, fa) = named_family(NamedFamilyId::FA, p)?;
    let pr = conditional_probability(&d, &fa, &[f4(&d)?], &[at(&d, 2, "A")?], tol)?;
    out.push(item("Eq. 11", "Pr", "A2 | S0, F4", real(pr), 1.0));

    let (d, fap) = named_family(NamedFamilyId::FAPrime, p)?;
    let q = [at(&d, 1, "A")?, at(&d, 2, "A")?, at(&d, 3, "A")?];
    let pr = conditional_probability(&d, &fap, &[f4(&d)?], &q, tol)?;
    out.push(item("Eq. 16", "Pr", "A1, A2, A3 | S0, F4", real(pr), 1.0));

    let (d, fb) = named_family(NamedFamilyId::FB, p)?;
    let kets = family_chain_kets(&d, &fb)?;
    for (i, want) in [-b2 / 2.0, a2 + b2 / 2.0].into_iter().enumerate() {
        out.push(item(
            "Eq. 18",
            "<F4|chain>",
            fb.history_label(i),
            kets[i].amplitude("F")?,
            want,
        ));
    }

    let (d, fc) = named_family(NamedFamilyId::FC, p)?;
    let kets = family_chain_kets(&d, &fc)?;
    for (i, want) in [b2 / 2.0, a2 - b2 / 2.0].into_iter().enumerate() {
        out.push(item(
            "Eq. 21",
            "<F4|chain>",
            fc.history_label(i),
            kets[i].amplitude("F")?,
            want,
        ));
    }
    let ip = kets[0].inner(&kets[1])?;
    out.push(item(
        "Eq. 21",
        "chain_overlap",
        "F_C",
        ip,
        (b2 / 2.0) * (a2 - b2 / 2.0),
    ));

    let special = BeamSplitterParams::special();
    let (d, fc) = named_family(NamedFamilyId::FC, special)?;
    let pr = conditional_probability(&d, &fc, &[f4(&d)?], &[at(&d, 2, "C")?], tol)?;
    out.push(item(
        "Eq. 23",
        "Pr",
        "C2 | S0, F4 at alpha2 = 1/3",
        real(pr),
        1.0,
    ));
    let w = born_probabilities(&d, &fc, tol)?;
    out.push(item(
        "Eq. 23",
        "Pr",
        format!("{} at alpha2 = 1/3", fc.history_label(0)),
        real(w[0]),
        1.0 / 9.0,
    ));

    let d = model(cfg)?;
    let eps = cfg.epsilon;
    for (five, tag, ids) in [(false, "Eq. 30", "a,d,e,w"), (true, "Eq. 33", "a,d,b,c,e")] {
        let js = evolve(cfg, &d, ids)?;
        let present: BTreeSet<String> = branch_components(&js, tol)
            .into_iter()
            .map(|b| b.label)
            .collect();
        let expected = branch_closed_form(a2, eps, five);
        let want_set: BTreeSet<String> = expected.iter().map(|(l, _)| l.to_string()).collect();
        // epsilon = 0 leaves only the o branch
        if eps > 0.0 {
            out.push(item(
                tag,
                "nonzero_branches",
                format!("probes {ids}"),
                real(if present == want_set { 1.0 } else { 0.0 }),
                1.0,
            ));
        }
        for (label, v) in expected {
            let phi = js.component(js.kappa_from_label(label).expect("known label"));
            for (i, ch) in ["F", "G", "H"].iter().enumerate() {
                out.push(item(
                    tag,
                    format!("Phi^{label}"),
                    format!("{ch}4"),
                    phi.amplitude(ch)?,
                    v[i],
                ));
            }
        }
        let dist = outcome_distribution(&js, &Pdi::channels(js.slice()))?;
        if !five {
            let ka = dist.kappa("a").expect("probe a");
            out.push(item(
                "Eq. 32",
                "Pr",
                "F4, a",
                real(dist.probability("F4", ka)),
                eps * a2 * a2,
            ));
            out.push(item(
                "Eq. 32",
                "Pr",
                "F4, o",
                real(dist.probability("F4", Kappa::NONE)),
                (1.0 - eps) * a2 * a2,
            ));
            let cond = dist.conditional(&["F4"], |k| k == ka).unwrap_or(f64::NAN);
            out.push(item("Eq. 32", "Pr", "a | F4", real(cond), eps));
        } else if eps > 0.0 {
            let pdi = Pdi::from_label_groups(js.slice(), &[&["H"], &["F", "G"]])?;
            let groups = outcome_distribution(&js, &pdi)?;
            let lists = [
                vec!["o", "d", "b", "c", "db", "dc"],
                vec!["o", "a", "b", "c", "db", "dc", "be", "ce", "dbe", "dce"],
            ];
            for ((det, got), want) in coincidence_support(&groups, tol).into_iter().zip(lists) {
                let got_set: BTreeSet<String> = got.into_iter().collect();
                let want_set: BTreeSet<String> = want.iter().map(|s| s.to_string()).collect();
                let cond = format!("{det}: {}", want.join(" "));
                out.push(item(
                    "Eq. 35",
                    "support_matches",
                    cond,
                    real(if got_set == want_set { 1.0 } else { 0.0 }),
                    1.0,
                ));
            }
        }
    }

    let s0 = basis(&d, 0, "S")?;
    let fin = basis(&d, 4, "F")?;
    for (l, want) in [("A", 1.0), ("B", -b2 / (2.0 * a2)), ("C", b2 / (2.0 * a2))] {
        let w = weak_value(&d, &s0, &fin, &at(&d, 2, l)?, tol)?;
        out.push(item("Eq. 38", format!("<{l}2>_w"), "S0, F4", w, want));
    }
    Ok(out)
}

fn paper_suite(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let items = suite_items(cfg)?;
    let mut rep = Report::new(format!(
        "paper suite, {}, epsilon = {}",
        header(cfg),
        fmt_g(cfg.epsilon)
    ));
    let mut mismatches = 0;
    for it in &items {
        let diff = (it.got - it.want).norm();
        if !(diff <= cfg.tolerance) {
            mismatches += 1;
            rep.note(format!(
                "MISMATCH [{}] {} {}: got {}, expected {}",
                it.tag,
                it.quantity,
                it.condition,
                fmt_complex(it.got),
                fmt_complex(it.want)
            ));
        }
        rep.push(Row::complex(
            it.quantity.clone(),
            it.condition.clone(),
            it.got,
            it.tag,
        ));
    }
    if mismatches == 0 {
        rep.note(format!(
            "all {} values match their closed forms",
            items.len()
        ));
        Ok(Outcome::ok(rep))
    } else {
        rep.note(format!("{mismatches} of {} values mismatch", items.len()));
        Ok(Outcome {
            report: rep,
            status: Status::SuiteMismatch,
        })
    }
}
