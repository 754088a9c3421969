//! gnuplot scripts that read the CSV files written next to them.

use crate::methods::Method;
use crate::synthesis::NoiseCase;

const PREAMBLE: &str = "set datafile separator ','\nset terminal pngcairo size 900,600\nset grid\n";

/// One RMSE-vs-SNR panel per (noise case, L).
pub fn rmse_script(csv: &str, groups: &[(NoiseCase, usize)], methods: &[Method]) -> String {
    let mut s = String::from(PREAMBLE);
    s.push_str("set xlabel 'SNR (dB)'\nset ylabel 'RMSE (deg)'\nset logscale y\nset key top right\n");
    for (case, l) in groups {
        s.push_str(&format!("\nset output 'rmse_case{}_L{l}.png'\n", case.label()));
        s.push_str(&format!("set title 'Noise case {}, L = {l}'\n", case.label()));
        let lines: Vec<String> = methods
            .iter()
            .map(|m| {
                format!(
                    "'{csv}' skip 2 using 3:((strcol(1) eq '{m}' && strcol(2) eq '{c}' && $4 == {l}) ? $6 : 1/0) with linespoints title '{m}'",
                    c = case.label()
                )
            })
            .collect();
        s.push_str(&format!("plot {}\n", lines.join(", \\\n     ")));
    }
    s
}

pub fn spectrum_script(csv: &str, png: &str) -> String {
    format!(
        "{PREAMBLE}set output '{png}'\nset xlabel 'DOA (deg)'\nset ylabel 'power (dB)'\nset xrange [-90:90]\n\
         plot '{csv}' skip 2 using 1:3 with lines title columnhead(4)\n"
    )
}

pub fn noise_trace_script(csv: &str) -> String {
    format!(
        "{PREAMBLE}set output 'noise_trace.png'\nset xlabel 'iteration'\nset ylabel 'mean sigma2 est / sigma2 true'\n\
         set yrange [0:*]\n\
         plot '{csv}' skip 2 using 4:(strcol(1) eq 'SBL2' ? $5 : 1/0) with lines title 'SBL2', \\\n     \
         '{csv}' skip 2 using 4:(strcol(1) eq 'SBL2-EM' ? $5 : 1/0) with lines title 'SBL2-EM', \\\n     \
         1 with lines dt 2 notitle\n"
    )
}
