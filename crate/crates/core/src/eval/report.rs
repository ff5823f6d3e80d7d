use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::metrics::{
    form_accuracy, per_form_table, pronoun_prf, seen_unseen_report, total_accuracy, Breakdown, EvalPair, FormRow, Prf,
    SedGranularity, SeenUnseen,
};
use crate::corpus::RefForm;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub count: usize,
    pub granularity: SedGranularity,
    pub mean_sed: f64,
    pub total_acc: f64,
    pub name_acc: Option<f64>,
    pub pronoun_acc: Option<f64>,
    pub pronoun: Prf,
    pub per_form: BTreeMap<RefForm, FormRow>,
    pub seen_unseen: SeenUnseen,
}

/// All metrics over `pairs`; seen/unseen follows each pair's `seen` flag.
pub fn evaluate(pairs: &[EvalPair], granularity: SedGranularity) -> Result<EvalReport> {
    let Some(total_acc) = total_accuracy(pairs) else {
        return Err(Error::InvalidArgument("nothing to evaluate".into()));
    };
    let sed_sum: usize = pairs.iter().map(|p| p.sed(granularity)).sum();
    let seen: BTreeSet<&str> = pairs.iter().filter(|p| p.seen).map(|p| p.wiki_id.as_str()).collect();
    Ok(EvalReport {
        count: pairs.len(),
        granularity,
        mean_sed: sed_sum as f64 / pairs.len() as f64,
        total_acc,
        name_acc: form_accuracy(pairs, RefForm::Name),
        pronoun_acc: form_accuracy(pairs, RefForm::Pronoun),
        pronoun: pronoun_prf(pairs),
        per_form: per_form_table(pairs),
        seen_unseen: seen_unseen_report(pairs, &seen),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{:.2}%", 100.0 * x))
}

fn breakdown_records(out: &mut Vec<(String, String)>, prefix: &str, b: &Breakdown) {
    out.push((format!("{prefix}.total_acc"), opt(b.total.map(|r| r.accuracy))));
    out.push((format!("{prefix}.support"), b.total.map_or(0, |r| r.support).to_string()));
    for form in RefForm::ALL {
        if let Some(row) = b.per_form.get(&form) {
            out.push((format!("{prefix}.{form}.acc"), format!("{:.6}", row.accuracy)));
            out.push((format!("{prefix}.{form}.support"), row.support.to_string()));
        }
    }
}

impl EvalReport {
    /// `(metric, value)` pairs in a fixed order.
    pub fn records(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("count".to_string(), self.count.to_string()),
            ("sed_granularity".to_string(), self.granularity.as_str().to_string()),
            ("mean_sed".to_string(), format!("{:.6}", self.mean_sed)),
            ("total_acc".to_string(), format!("{:.6}", self.total_acc)),
            ("name_acc".to_string(), opt(self.name_acc)),
            ("pronoun_acc".to_string(), opt(self.pronoun_acc)),
            ("pronoun_precision".to_string(), format!("{:.6}", self.pronoun.precision)),
            ("pronoun_recall".to_string(), format!("{:.6}", self.pronoun.recall)),
            ("pronoun_f1".to_string(), format!("{:.6}", self.pronoun.f1)),
        ];
        for form in RefForm::ALL {
            if let Some(row) = self.per_form.get(&form) {
                out.push((format!("form.{form}.acc"), format!("{:.6}", row.accuracy)));
                out.push((format!("form.{form}.support"), row.support.to_string()));
            }
        }
        breakdown_records(&mut out, "seen", &self.seen_unseen.seen);
        breakdown_records(&mut out, "unseen", &self.seen_unseen.unseen);
        out
    }

    /// One `metric<TAB>value` line per record.
    pub fn to_tsv(&self) -> String {
        self.records().into_iter().map(|(k, v)| format!("{k}\t{v}\n")).collect()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "pairs           {}", self.count);
        let _ = writeln!(s, "SED ({})      {:.2}", self.granularity.as_str(), self.mean_sed);
        let _ = writeln!(s, "total acc       {}", pct(Some(self.total_acc)));
        let _ = writeln!(s, "name acc        {}", pct(self.name_acc));
        let _ = writeln!(s, "pronoun acc     {}", pct(self.pronoun_acc));
        let _ = writeln!(
            s,
            "pronoun P/R/F1  {:.2} {:.2} {:.2}",
            self.pronoun.precision, self.pronoun.recall, self.pronoun.f1
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14}{:>10}{:>9}{:>10}{:>9}{:>10}{:>9}", "form", "all", "n", "seen", "n", "unseen", "n");
        let cell = |t: &BTreeMap<RefForm, FormRow>, f: RefForm| match t.get(&f) {
            Some(r) => (pct(Some(r.accuracy)), r.support),
            None => ("-".to_string(), 0),
        };
        for form in RefForm::ALL {
            let (a, an) = cell(&self.per_form, form);
            let (b, bn) = cell(&self.seen_unseen.seen.per_form, form);
            let (c, cn) = cell(&self.seen_unseen.unseen.per_form, form);
            let _ = writeln!(s, "{:<14}{a:>10}{an:>9}{b:>10}{bn:>9}{c:>10}{cn:>9}", form.as_str());
        }
        let tot = |b: &Breakdown| (pct(b.total.map(|r| r.accuracy)), b.total.map_or(0, |r| r.support));
        let (b, bn) = tot(&self.seen_unseen.seen);
        let (c, cn) = tot(&self.seen_unseen.unseen);
        let _ = writeln!(
            s,
            "{:<14}{:>10}{:>9}{b:>10}{bn:>9}{c:>10}{cn:>9}",
            "total",
            pct(Some(self.total_acc)),
            self.count
        );
        s
    }

    /// Writes `<stem>.tsv` and `<stem>.txt` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (ext, text) in [("tsv", self.to_tsv()), ("txt", self.to_table())] {
            let path = dir.join(format!("{stem}.{ext}"));
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// `wiki_id<TAB>expression` lines.
pub fn write_predictions(path: &Path, rows: &[(String, Vec<String>)]) -> Result<()> {
    let text: String = rows.iter().map(|(id, expr)| format!("{id}\t{}\n", expr.join(" "))).collect();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, expr) =
            line.split_once('\t').ok_or(Error::MissingField { line: i + 1, field: "generated_expression" })?;
        out.push((id.to_string(), expr.split_whitespace().map(String::from).collect()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(gold: &str, generated: &str, form: RefForm) -> EvalPair {
        let t = |s: &str| s.split_whitespace().map(String::from).collect();
        EvalPair { wiki_id: "x".into(), gold: t(gold), generated: t(generated), gold_form: form, seen: true }
    }

    #[test]
    fn single_exact_match() {
        let r = evaluate(&[pair("He", "he", RefForm::Pronoun)], SedGranularity::Char).unwrap();
        assert_eq!((r.total_acc, r.mean_sed), (1.0, 0.0));
        assert_eq!(r.pronoun_acc, Some(1.0));
        assert_eq!(r.name_acc, None);
    }

    #[test]
    fn mean_sed_averages() {
        let pairs = [pair("abcd", "abcd", RefForm::Name), pair("abcd", "wxyz", RefForm::Name)];
        let r = evaluate(&pairs, SedGranularity::Char).unwrap();
        assert_eq!(r.mean_sed, 2.0);
        assert!(evaluate(&[], SedGranularity::Char).is_err());
    }

    #[test]
    fn report_files() {
        let pairs = [pair("He", "he", RefForm::Pronoun), pair("A B", "A", RefForm::Name)];
        let r = evaluate(&pairs, SedGranularity::Char).unwrap();
        let tsv = r.to_tsv();
        assert!(tsv.contains("total_acc\t0.500000\n"));
        assert!(tsv.lines().all(|l| l.split('\t').count() == 2));
        assert!(r.to_table().contains("pronoun"));
        let dir = tempfile::tempdir().unwrap();
        r.write(dir.path(), "report").unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("report.tsv")).unwrap(), tsv);

        let rows = vec![("a".to_string(), vec!["x".to_string(), "y".to_string()]), ("b".to_string(), vec![])];
        let path = dir.path().join("pred.tsv");
        write_predictions(&path, &rows).unwrap();
        assert_eq!(read_predictions(&path).unwrap(), rows);
    }
}
