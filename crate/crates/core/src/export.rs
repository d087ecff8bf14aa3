//! Text renderings of route tables and diffs, and the structured document
//! that round-trips a table exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::route::{PolicyDiff, Route, RouteEntry, RouteFailure, RouteTable};
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    /// Source-by-destination grid of dash-joined paths.
    MatrixTable,
    FlatCsv,
    /// JSON document readable by [`from_structured`].
    Structured,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix-table" => Ok(ExportFormat::MatrixTable),
            "flat-csv" => Ok(ExportFormat::FlatCsv),
            "structured" => Ok(ExportFormat::Structured),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

/// Two-decimal microseconds, never rendering a negative zero.
pub fn fmt_reward(us: f64) -> String {
    let s = format!("{us:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

pub fn render(table: &RouteTable, format: ExportFormat, label: &str) -> Result<String> {
    match format {
        ExportFormat::MatrixTable => Ok(matrix_table(table, label)),
        ExportFormat::FlatCsv => flat_csv(table),
        ExportFormat::Structured => Ok(to_structured(table)),
    }
}

/// Grid with one row per source: `Source | Path | <dst...>`, diagonal `-`.
pub fn matrix_table(table: &RouteTable, label: &str) -> String {
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(table.nodes.len() + 1);
    let mut header = vec!["Source".to_string(), "Path".to_string()];
    header.extend(table.nodes.iter().map(|n| n.to_string()));
    rows.push(header);
    for &src in &table.nodes {
        let mut row = vec![src.to_string(), label.to_string()];
        for &dst in &table.nodes {
            row.push(if src == dst {
                "-".into()
            } else {
                table.get(src, dst).map_or("unreachable".into(), RouteEntry::label)
            });
        }
        rows.push(row);
    }
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
    }
    out
}

/// Parses the cells of a [`matrix_table`] rendering, header row excluded.
pub fn parse_matrix_table(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split('|').map(|c| c.trim().to_string()).collect())
        .collect()
}

pub fn flat_csv(table: &RouteTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["src", "dst", "status", "path", "reward_us"])
        .map_err(io)?;
    for ((src, dst), e) in table.iter() {
        let (status, reward) = match e {
            RouteEntry::Path(r) => ("ok", fmt_reward(r.total_reward)),
            RouteEntry::Unreachable => ("unreachable", String::new()),
            RouteEntry::NotConverged(RouteFailure::Loop { .. }) => ("loop", String::new()),
            RouteEntry::NotConverged(_) => ("too_long", String::new()),
        };
        let path = e.route().map(Route::display_path).unwrap_or_default();
        w.write_record([src.to_string(), dst.to_string(), status.into(), path, reward])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    topology: String,
    nodes: Vec<NodeId>,
    routes: Vec<RouteRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteRecord {
    src: NodeId,
    dst: NodeId,
    status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<Vec<NodeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reward: Option<f64>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    Unreachable,
    Loop,
    TooLong,
}

pub fn to_structured(table: &RouteTable) -> String {
    let routes = table
        .iter()
        .map(|((src, dst), e)| {
            let (status, path, reward) = match e {
                RouteEntry::Path(r) => (Status::Ok, Some(r.path.clone()), Some(r.total_reward)),
                RouteEntry::Unreachable => (Status::Unreachable, None, None),
                RouteEntry::NotConverged(RouteFailure::Loop { path }) => (Status::Loop, Some(path.clone()), None),
                RouteEntry::NotConverged(RouteFailure::TooLong { path }) => (Status::TooLong, Some(path.clone()), None),
                RouteEntry::NotConverged(RouteFailure::Unreachable) => (Status::Unreachable, None, None),
            };
            RouteRecord {
                src,
                dst,
                status,
                path,
                reward,
            }
        })
        .collect();
    let doc = TableDoc {
        topology: table.topology.clone(),
        nodes: table.nodes.clone(),
        routes,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("route table serializes");
    s.push('\n');
    s
}

pub fn from_structured(text: &str) -> Result<RouteTable> {
    let doc: TableDoc = serde_json::from_str(text)?;
    let mut table = RouteTable::from_parts(doc.topology, doc.nodes);
    for r in doc.routes {
        let missing = |what: &str| Error::Parse(format!("route {}->{} lacks {what}", r.src, r.dst));
        let entry = match r.status {
            Status::Ok => RouteEntry::Path(Route {
                path: r.path.clone().ok_or_else(|| missing("path"))?,
                total_reward: r.reward.ok_or_else(|| missing("reward"))?,
            }),
            Status::Unreachable => RouteEntry::Unreachable,
            Status::Loop => RouteEntry::NotConverged(RouteFailure::Loop {
                path: r.path.clone().ok_or_else(|| missing("path"))?,
            }),
            Status::TooLong => RouteEntry::NotConverged(RouteFailure::TooLong {
                path: r.path.clone().ok_or_else(|| missing("path"))?,
            }),
        };
        table.insert(r.src, r.dst, entry);
    }
    Ok(table)
}

/// `path  reward` lines for the requested pairs, e.g. `1-6-7-22  -123.55`.
pub fn report_lines(table: &RouteTable, pairs: &[(NodeId, NodeId)]) -> Result<Vec<String>> {
    pairs
        .iter()
        .map(|&(src, dst)| {
            if src == dst && table.nodes.contains(&src) {
                return Ok(format!("{src}  {}", fmt_reward(0.0)));
            }
            match table.get(src, dst) {
                Some(RouteEntry::Path(r)) => Ok(format!("{}  {}", r.display_path(), fmt_reward(r.total_reward))),
                Some(other) => Ok(format!("{}  -", other.label())),
                None => Err(Error::PairNotFound {
                    src,
                    dst,
                    available: table.len(),
                }),
            }
        })
        .collect()
}

/// Human-readable diff: one line per changed pair plus a summary.
pub fn render_diff(diff: &PolicyDiff) -> String {
    let side = |e: &RouteEntry| match e.route() {
        Some(r) => format!("{} ({})", r.display_path(), fmt_reward(r.total_reward)),
        None => e.label(),
    };
    let mut out = String::new();
    for e in &diff.entries {
        out.push_str(&format!("{}->{}: {} => {}\n", e.src, e.dst, side(&e.old), side(&e.new)));
    }
    out.push_str(&format!(
        "changed {} unchanged {} newly-unreachable {}\n",
        diff.changed, diff.unchanged, diff.newly_unreachable
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{solve_all, WeightedView};
    use crate::topology::{Link, Topology};

    fn small() -> (Topology, RouteTable) {
        let t = Topology::new(
            vec![NodeId(1), NodeId(2), NodeId(3), NodeId(4)],
            vec![Link::new(1, 2, 0.0), Link::new(2, 3, 0.0)],
        )
        .unwrap();
        let v = WeightedView::from_link_weights(&t, vec![1.5, 2.25]).unwrap();
        let table = solve_all(&v);
        (t, table)
    }

    #[test]
    fn matrix_grid_shape() {
        let (_, table) = small();
        let text = matrix_table(&table, "primary");
        let rows = parse_matrix_table(&text);
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.len() == 6));
        assert_eq!(rows[0], ["1", "primary", "-", "1-2", "1-2-3", "unreachable"]);
        assert_eq!(rows[3][5], "-");
    }

    #[test]
    fn csv_and_report() {
        let (_, table) = small();
        let csv = flat_csv(&table).unwrap();
        assert!(csv.starts_with("src,dst,status,path,reward_us\n1,2,ok,1-2,-1.50\n"));
        assert!(csv.contains("1,4,unreachable,,\n"));
        let lines = report_lines(&table, &[(NodeId(1), NodeId(3)), (NodeId(2), NodeId(2))]).unwrap();
        assert_eq!(lines, ["1-2-3  -3.75", "2  0.00"]);
        assert_eq!(
            report_lines(&table, &[(NodeId(1), NodeId(9))]).unwrap_err(),
            Error::PairNotFound {
                src: NodeId(1),
                dst: NodeId(9),
                available: 12
            }
        );
    }

    #[test]
    fn structured_round_trip_with_failures() {
        let (_, mut table) = small();
        table.insert(
            NodeId(3),
            NodeId(1),
            RouteEntry::NotConverged(RouteFailure::Loop {
                path: vec![NodeId(3), NodeId(2), NodeId(3)],
            }),
        );
        let back = from_structured(&to_structured(&table)).unwrap();
        assert_eq!(back, table);
        assert!(from_structured(r#"{"topology":"x","nodes":[1],"routes":[{"src":1,"dst":2,"status":"ok"}]}"#).is_err());
    }

    #[test]
    fn reward_formatting() {
        assert_eq!(fmt_reward(-123.549_999_999), "-123.55");
        assert_eq!(fmt_reward(-0.0), "0.00");
        assert_eq!(fmt_reward(-0.001), "0.00");
        assert_eq!("flat-csv".parse::<ExportFormat>().unwrap(), ExportFormat::FlatCsv);
        assert!("xml".parse::<ExportFormat>().is_err());
    }
}
