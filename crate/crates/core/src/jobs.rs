//! Dispatch of a parsed job to library operations, producing TSV and JSON.

use crate::dsl::{eval_field, eval_rational, pep_to_text, JobSpec};
use crate::error::{Error, Result};
use crate::experiments::{
    count_growth, enumerate_values, evertse_scan, membership_count, minimal_vectors, sl2_count, SUnitConfig,
    DEFAULT_DISCARD_FACTOR, DEFAULT_EXPONENT_BOX_CAP, DEFAULT_MAX_CELLS,
};
use crate::exppoly::{
    degeneracy_locus, reduce_to_independent, restrict_to_coset, IntegerLatticeCoset, PepSystem,
    DEFAULT_RELATION_BOUND,
};
use crate::heights::{affine_height, projective_height, HeightValue, DEFAULT_TOLERANCE};
use crate::matrixk::{bg_to_pep, eigen_decompose, jordan_multiplicative, MatrixK};
use crate::numfield::Field;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub tsv: String,
    pub json: Value,
}

fn missing(what: &str, command: &str) -> Error {
    Error::InvalidArgument(format!("`{command}` needs a `{what}` line"))
}

fn pow10(k: u32) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(10), k as usize))
}

struct Ctx<'a> {
    job: &'a JobSpec,
    command: &'a str,
    field: Option<Field>,
}

impl<'a> Ctx<'a> {
    fn field(&mut self) -> Result<Field> {
        if self.field.is_none() {
            self.field = Some(self.job.build_field()?);
        }
        Ok(self.field.clone().expect("set"))
    }

    fn pep(&mut self) -> Result<PepSystem> {
        let k = self.field()?;
        self.job.pep.as_ref().ok_or_else(|| missing("pep", self.command))?.build(&k)
    }

    fn matrix(&mut self) -> Result<MatrixK> {
        let k = self.field()?;
        let decl = match &self.job.settings.target {
            Some(name) => self
                .job
                .matrices
                .iter()
                .find(|m| &m.name == name)
                .ok_or_else(|| Error::InvalidArgument(format!("no matrix named `{name}`")))?,
            None => self.job.matrices.first().ok_or_else(|| missing("matrix", self.command))?,
        };
        decl.build(&k)
    }

    fn max_cells(&self) -> u128 {
        self.job.settings.max_cells.unwrap_or(DEFAULT_MAX_CELLS)
    }

    fn tolerance(&self) -> Result<f64> {
        match &self.job.settings.tolerance {
            None => Ok(DEFAULT_TOLERANCE),
            Some(e) => {
                let t = eval_rational(e)?.to_f64().unwrap_or(0.0);
                if t > 0.0 {
                    Ok(t)
                } else {
                    Err(Error::InvalidArgument("tolerance must be positive".into()))
                }
            }
        }
    }

    fn integer_thresholds(&self, default: Vec<i64>) -> Result<Vec<i64>> {
        match self.job.thresholds()? {
            None => Ok(default),
            Some(ts) => ts
                .iter()
                .map(|t| {
                    t.is_integer()
                        .then(|| t.to_integer().to_i64())
                        .flatten()
                        .ok_or_else(|| Error::InvalidArgument(format!("threshold {t} must be an integer")))
                })
                .collect(),
        }
    }
}

fn height_row(kind: &str, h: &HeightValue) -> (String, Value) {
    let exact = h.exact_rational_power.clone().unwrap_or_else(|| "-".into());
    (
        format!("{kind}\t{:.15}\t{:.15}\t{:.15}\t{exact}\n", h.log_lo, h.log_hi, h.value()),
        json!({ "kind": kind, "height": h }),
    )
}

/// Run one job; the job's `command` line selects the operation.
pub fn run(job: &JobSpec) -> Result<Report> {
    let command = job.command.as_deref().ok_or_else(|| Error::InvalidArgument("the job has no command".into()))?;
    let mut cx = Ctx { job, command, field: None };
    let s = &job.settings;
    let (tsv, json) = match command {
        "height" => {
            let k = cx.field()?;
            let pt = s.point.as_ref().ok_or_else(|| missing("point", command))?;
            let xs = pt.iter().map(|e| eval_field(e, &k)).collect::<Result<Vec<_>>>()?;
            let tol = cx.tolerance()?;
            let mut tsv = String::from("kind\tlog_lo\tlog_hi\tvalue\texact_power\n");
            let mut rows = Vec::new();
            let (t, j) = height_row("affine", &affine_height(&xs, tol)?);
            tsv.push_str(&t);
            rows.push(j);
            if xs.iter().any(|x| !x.is_zero()) {
                let (t, j) = height_row("projective", &projective_height(&xs, tol)?);
                tsv.push_str(&t);
                rows.push(j);
            }
            let shown: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
            (tsv, json!({ "point": shown, "tolerance": tol, "heights": rows }))
        }
        "enumerate" => {
            let f = cx.pep()?;
            let set = enumerate_values(&f, s.box_bound.unwrap_or(5), cx.max_cells())?;
            (set.to_tsv(), json!({ "box": set.box_bound, "box_relative": true, "values": set.records() }))
        }
        "count-growth" => {
            let f = cx.pep()?;
            let ts = job.thresholds()?.unwrap_or_else(|| (2..=6).map(pow10).collect());
            let g = count_growth(&f, &ts, cx.max_cells())?;
            let mut tsv = g.to_tsv();
            tsv.push_str(&format!(
                "# slope_vs_log_h\t{:.9}\n# intercept\t{:.9}\n",
                g.fit.slope_vs_log, g.fit.intercept_vs_log
            ));
            (tsv, serde_json::to_value(&g).expect("serializable"))
        }
        "minimal" => {
            let f = cx.pep()?;
            let factor = match &s.discard_factor {
                Some(e) => eval_rational(e)?.to_f64().unwrap_or(DEFAULT_DISCARD_FACTOR),
                None => DEFAULT_DISCARD_FACTOR,
            };
            let rep = minimal_vectors(&f, s.box_bound.unwrap_or(10), cx.max_cells(), factor)?;
            (rep.to_tsv(), serde_json::to_value(&rep).expect("serializable"))
        }
        "evertse-scan" => {
            let k = cx.field()?;
            let cfg = SUnitConfig {
                primes: s.primes.clone().ok_or_else(|| missing("primes", command))?,
                summands: s.summands.unwrap_or(2),
                exponent_bound: s.exponent_bound.unwrap_or(10),
                constant: match &s.constant {
                    Some(e) => eval_rational(e)?.to_string(),
                    None => "1/5".into(),
                },
            };
            let cap = s.max_cells.unwrap_or(DEFAULT_EXPONENT_BOX_CAP);
            let rep = evertse_scan(&k, &cfg, cap)?;
            (rep.to_tsv(), serde_json::to_value(&rep).expect("serializable"))
        }
        "sl2-count" => {
            let ts = cx.integer_thresholds((0..=6).map(|i| 1 << i).collect())?;
            let g = sl2_count(&ts)?;
            let mut tsv = g.to_tsv();
            if let Some(p) = g.fit.power_law_exponent {
                tsv.push_str(&format!("# power_law_exponent\t{p:.9}\n"));
            }
            (tsv, serde_json::to_value(&g).expect("serializable"))
        }
        "jordan" => {
            let m = cx.matrix()?;
            let jd = jordan_multiplicative(&m)?;
            (
                format!("part\tmatrix\nsemisimple\t{}\nunipotent\t{}\n", jd.semisimple, jd.unipotent),
                json!({
                    "matrix": m.to_spec(),
                    "semisimple": jd.semisimple.to_spec(),
                    "unipotent": jd.unipotent.to_spec(),
                }),
            )
        }
        "semisimple" => {
            let m = cx.matrix()?;
            let ss = m.is_semisimple();
            let mut tsv = format!("property\tvalue\nsemisimple\t{ss}\nminimal_polynomial\t{}\n", m.minpoly());
            let mut out = json!({ "semisimple": ss, "minimal_polynomial": m.minpoly().to_string() });
            if ss {
                match eigen_decompose(&m) {
                    Ok(ed) => {
                        let ev: Vec<String> = ed.eigenvalues.iter().map(|x| x.to_string()).collect();
                        tsv.push_str(&format!("eigenvalues\t{}\neigenvectors\t{}\n", ev.join(", "), ed.g));
                        out["eigenvalues"] = json!(ev);
                        out["eigenvectors"] = json!(ed.g.to_spec());
                    }
                    Err(Error::EigenvaluesNotInField(fs)) => {
                        tsv.push_str(&format!("missing_factors\t{}\n", fs.join(", ")));
                        out["missing_factors"] = json!(fs);
                    }
                    Err(e) => return Err(e),
                }
            }
            (tsv, out)
        }
        "bg-to-pep" => {
            let k = cx.field()?;
            if job.matrices.is_empty() {
                return Err(missing("matrix", command));
            }
            let ms = job.matrices.iter().map(|m| m.build(&k)).collect::<Result<Vec<_>>>()?;
            let names: Vec<String> = job.matrices.iter().map(|m| format!("a_{}", m.name)).collect();
            let f = bg_to_pep(&ms)?;
            (pep_to_text(&f, Some(&names)), json!({ "variables": names, "system": f.to_spec() }))
        }
        "degeneracy" => {
            let f = cx.pep()?;
            let j = s.component.unwrap_or(0);
            let loc = degeneracy_locus(&f, j, s.box_bound.unwrap_or(10))?;
            let mut tsv = String::from("offset\tgenerators\n");
            for c in &loc.cosets {
                let g: Vec<String> = c.basis.iter().map(|b| format!("{b:?}")).collect();
                tsv.push_str(&format!("{:?}\t{}\n", c.offset, g.join(" ")));
            }
            (tsv, json!({ "component": j, "locus": loc, "box_relative": true }))
        }
        "restrict" => {
            let f = cx.pep()?;
            let c = s.coset.as_ref().ok_or_else(|| missing("coset", command))?;
            if c.offset.len() != f.r() || c.generators.iter().any(|g| g.len() != f.r()) {
                return Err(Error::DimensionMismatch(format!("coset vectors must have length {}", f.r())));
            }
            let coset = IntegerLatticeCoset::new(c.offset.clone(), &c.generators);
            let g = restrict_to_coset(&f, &coset)?;
            (pep_to_text(&g, None), json!({ "coset": coset, "system": g.to_spec() }))
        }
        "relations" => {
            let f = cx.pep()?;
            let red = reduce_to_independent(&f, s.relation_bound.unwrap_or(DEFAULT_RELATION_BOUND))?;
            let mut tsv = String::from("relation\n");
            for b in &red.relations.basis {
                tsv.push_str(&format!("{b:?}\n"));
            }
            tsv.push_str(&format!("# moduli\t{:?}\n# residue_classes\t{}\n", red.moduli, red.classes.len()));
            let torsion: Vec<Value> =
                red.torsion.iter().map(|(x, o)| json!({ "element": x.to_string(), "order": o })).collect();
            (
                tsv,
                json!({
                    "relations": red.relations,
                    "moduli": red.moduli,
                    "torsion": torsion,
                    "classes": red.classes.iter().map(|c| json!({
                        "residue": c.residue,
                        "system": c.system.to_spec(),
                    })).collect::<Vec<_>>(),
                }),
            )
        }
        "membership-count" => {
            let f = cx.pep()?;
            let g = cx.matrix()?;
            let ts = cx.integer_thresholds(vec![10, 20, 50, 100])?;
            let rep = membership_count(&f, &g, &ts, s.value_box.unwrap_or(10), cx.max_cells())?;
            (rep.to_tsv(), serde_json::to_value(&rep).expect("serializable"))
        }
        other => return Err(Error::InvalidArgument(format!("unknown command `{other}`"))),
    };
    Ok(Report { command: command.into(), tsv, json })
}

/// JSON envelope for a failure.
pub fn error_json(e: &Error) -> Value {
    let class = match e.class() {
        crate::error::ErrorClass::Parse => "parse",
        crate::error::ErrorClass::MathDomain => "math-domain",
        crate::error::ErrorClass::CapExceeded => "cap-exceeded",
    };
    json!({ "error": { "code": e.code(), "class": class, "message": e.to_string() } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_job;

    #[test]
    fn height_of_pair() {
        let job = parse_job("command height\npoint 3, -2\n").unwrap();
        let rep = run(&job).unwrap();
        let h: HeightValue = serde_json::from_value(rep.json["heights"][0]["height"].clone()).unwrap();
        assert!((h.value() - 3f64.ln()).abs() < 1e-9);
        assert!(rep.tsv.starts_with("kind\tlog_lo"));
    }

    #[test]
    fn jordan_report() {
        let job = parse_job("matrix g = [[2, 1], [0, 2]]\ncommand jordan\n").unwrap();
        let rep = run(&job).unwrap();
        assert_eq!(rep.tsv, "part\tmatrix\nsemisimple\t[[2, 0], [0, 2]]\nunipotent\t[[1, 1/2], [0, 1]]\n");
    }

    #[test]
    fn missing_inputs_are_reported() {
        let job = parse_job("command enumerate\n").unwrap();
        assert!(matches!(run(&job).unwrap_err(), Error::InvalidArgument(_)));
        let job = parse_job("box 3\n").unwrap();
        assert!(run(&job).is_err());
    }

    #[test]
    fn bg_output_reparses() {
        let text = "field x^2-2 as s\nmatrix g = [[3, 4], [2, 3]]\ncommand bg-to-pep\n";
        let rep = run(&parse_job(text).unwrap()).unwrap();
        let job = parse_job(&rep.tsv).unwrap();
        let k = job.build_field().unwrap();
        let f = job.pep.unwrap().build(&k).unwrap();
        let g = MatrixK::from_ints(&k, &[vec![3, 4], vec![2, 3]]).unwrap();
        for a in -3..=3 {
            assert_eq!(f.evaluate(&[a]).unwrap(), g.pow(a).unwrap().entries());
        }
    }
}
