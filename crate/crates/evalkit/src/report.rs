//! CSV emitters. Undefined values print as `NA`.

use std::io::{self, Write};

use cutleak_learners::Importance;

use crate::eval::{EvalReport, MatchedReport, SubfamilySummary, SweepPoint};
use crate::metrics::Interval;
use crate::pca::Pca;
use crate::tasks::Task;

pub fn num(v: f64) -> String {
    format!("{v:.4}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), num)
}

fn ci(v: &Option<Interval>) -> String {
    match v {
        Some(i) => format!("{},{}", num(i.low), num(i.high)),
        None => "NA,NA".into(),
    }
}

pub const REPORT_HEADER: &str =
    "task,model,mask,protocol,n_train,n_test,acc,acc_lo,acc_hi,macro_f1,f1_lo,f1_hi,macro_auc,auc_lo,auc_hi,auc_undefined";

pub fn write_reports(w: &mut impl Write, reports: &[EvalReport]) -> io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.task,
            r.model_kind,
            r.mask.name(),
            r.protocol.name(),
            r.n_train,
            r.n_test,
            num(r.acc),
            ci(&r.acc_ci),
            num(r.macro_f1),
            ci(&r.f1_ci),
            opt(r.macro_auc),
            ci(&r.auc_ci),
            r.auc_undefined()
        )?;
    }
    Ok(())
}

/// One grid per report, rows true class and columns predicted class.
pub fn write_confusion(w: &mut impl Write, r: &EvalReport) -> io::Result<()> {
    let names = r.task.class_names();
    writeln!(w, "true\\pred,{}", names.join(","))?;
    for (name, row) in names.iter().zip(&r.confusion) {
        let cells: Vec<String> = row.iter().map(usize::to_string).collect();
        writeln!(w, "{name},{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_importance(w: &mut impl Write, rows: &[(Task, Vec<&str>, Importance)]) -> io::Result<()> {
    writeln!(w, "task,feature,mean,sd")?;
    for (task, names, imp) in rows {
        for (i, n) in names.iter().enumerate() {
            writeln!(w, "{task},{n},{},{}", num(imp.mean[i]), num(imp.sd[i]))?;
        }
    }
    Ok(())
}

pub fn write_matched(w: &mut impl Write, rows: &[MatchedReport]) -> io::Result<()> {
    writeln!(w, "task,natural_auc,matched_auc,retained,n_test,infeasible")?;
    for m in rows {
        writeln!(w, "{},{},{},{},{},{}", m.task, opt(m.natural_auc), opt(m.matched_auc), m.retained, m.n_test, m.infeasible)?;
    }
    Ok(())
}

pub fn write_sweep(w: &mut impl Write, rows: &[SweepPoint]) -> io::Result<()> {
    writeln!(w, "task,size,jobs,mean_auc,sd_auc,valid_reps,skipped")?;
    for p in rows {
        writeln!(w, "{},{},{},{},{},{},{}", p.task, p.size, p.jobs, opt(p.mean_auc), opt(p.sd_auc), p.valid, p.skipped)?;
    }
    Ok(())
}

pub fn write_subfamilies(w: &mut impl Write, s: &SubfamilySummary) -> io::Result<()> {
    writeln!(w, "family,n_test,acc,macro_f1,macro_auc")?;
    for f in &s.families {
        let r = &f.report;
        writeln!(w, "{},{},{},{},{}", f.family.name(), r.n_test, num(r.acc), num(r.macro_f1), opt(r.macro_auc))?;
    }
    for f in &s.skipped {
        writeln!(w, "{},0,NA,NA,NA", f.name())?;
    }
    writeln!(w, "pooled,{},{},NA,NA", s.families.iter().map(|f| f.report.n_test).sum::<usize>(), num(s.pooled_accuracy))
}

/// Explained variance and loadings, then one row per projected point with
/// its label.
pub fn write_pca(w: &mut impl Write, p: &Pca, features: &[&str], labels: &[String]) -> io::Result<()> {
    writeln!(w, "component,explained_variance_ratio,{}", features.join(","))?;
    for (k, (c, r)) in p.components.iter().zip(&p.explained_variance_ratio).enumerate() {
        let load: Vec<String> = c.iter().map(|v| num(*v)).collect();
        writeln!(w, "PC{},{},{}", k + 1, num(*r), load.join(","))?;
    }
    writeln!(w, "label,{}", (1..=p.components.len()).map(|k| format!("PC{k}")).collect::<Vec<_>>().join(","))?;
    for (pt, l) in p.projected.iter().zip(labels) {
        let v: Vec<String> = pt.iter().map(|x| num(*x)).collect();
        writeln!(w, "{l},{}", v.join(","))?;
    }
    Ok(())
}
