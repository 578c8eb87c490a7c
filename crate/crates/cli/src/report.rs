use lotforge::instance::CostBreakdown;
use lotforge::num::{format_rational, int, to_decimal, Rational};
use serde::Serialize;

const SIG_DIGITS: usize = 12;

/// A rational shown both exactly and as a 12-significant-digit decimal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Value {
    pub exact: String,
    pub decimal: String,
}

impl Value {
    pub fn new(q: &Rational) -> Self {
        Value {
            exact: format_rational(q),
            decimal: to_decimal(q, SIG_DIGITS),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlgCost {
    pub ordering: Value,
    pub holding: Value,
    pub total: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub instance_id: String,
    pub lp_value: Value,
    pub alg_cost: AlgCost,
    pub oracle_cost: Option<Value>,
    /// `total / lp_value`; absent when the LP value is 0.
    pub ratio_vs_lp: Option<Value>,
    /// `total / oracle_cost`; absent without an oracle or when the optimum is 0.
    pub ratio_vs_opt: Option<Value>,
    pub rounds: usize,
    pub cuts: usize,
    /// Only filled with `--timing`, so default output stays reproducible.
    pub wall_time_ms: Option<u64>,
}

fn ratio(num: &Rational, den: &Rational) -> Option<Value> {
    (den != &int(0)).then(|| Value::new(&(num / den)))
}

impl RunReport {
    pub fn new(
        instance_id: String,
        lp_value: &Rational,
        costs: &CostBreakdown,
        oracle: Option<&Rational>,
        rounds: usize,
        cuts: usize,
    ) -> Self {
        RunReport {
            instance_id,
            lp_value: Value::new(lp_value),
            alg_cost: AlgCost {
                ordering: Value::new(&costs.ordering),
                holding: Value::new(&costs.holding),
                total: Value::new(&costs.total),
            },
            oracle_cost: oracle.map(Value::new),
            ratio_vs_lp: ratio(&costs.total, lp_value),
            ratio_vs_opt: oracle.and_then(|opt| ratio(&costs.total, opt)),
            rounds,
            cuts,
            wall_time_ms: None,
        }
    }

    pub const CSV_HEADER: &'static str = "instance_id,lp_value,lp_value_dec,alg_ordering,alg_ordering_dec,\
alg_holding,alg_holding_dec,alg_total,alg_total_dec,oracle_cost,oracle_cost_dec,ratio_vs_lp,ratio_vs_lp_dec,\
ratio_vs_opt,ratio_vs_opt_dec,rounds,cuts,wall_time_ms";

    pub fn csv_row(&self) -> String {
        let pair = |v: &Value| format!("{},{}", v.exact, v.decimal);
        let opt_pair = |v: &Option<Value>| v.as_ref().map_or_else(|| ",".to_string(), pair);
        [
            self.instance_id.clone(),
            pair(&self.lp_value),
            pair(&self.alg_cost.ordering),
            pair(&self.alg_cost.holding),
            pair(&self.alg_cost.total),
            opt_pair(&self.oracle_cost),
            opt_pair(&self.ratio_vs_lp),
            opt_pair(&self.ratio_vs_opt),
            self.rounds.to_string(),
            self.cuts.to_string(),
            self.wall_time_ms.map_or_else(String::new, |t| t.to_string()),
        ]
        .join(",")
    }
}
