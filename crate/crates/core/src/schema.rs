//! Column layout of the CIC-DDoS2019 flow CSVs (88 columns).

/// Header of the public day-1 CSVs, whitespace-trimmed, in file order.
pub const CIC_HEADER: [&str; 88] = [
    "Unnamed: 0",
    "Flow ID",
    "Source IP",
    "Source Port",
    "Destination IP",
    "Destination Port",
    "Protocol",
    "Timestamp",
    "Flow Duration",
    "Total Fwd Packets",
    "Total Backward Packets",
    "Total Length of Fwd Packets",
    "Total Length of Bwd Packets",
    "Fwd Packet Length Max",
    "Fwd Packet Length Min",
    "Fwd Packet Length Mean",
    "Fwd Packet Length Std",
    "Bwd Packet Length Max",
    "Bwd Packet Length Min",
    "Bwd Packet Length Mean",
    "Bwd Packet Length Std",
    "Flow Bytes/s",
    "Flow Packets/s",
    "Flow IAT Mean",
    "Flow IAT Std",
    "Flow IAT Max",
    "Flow IAT Min",
    "Fwd IAT Total",
    "Fwd IAT Mean",
    "Fwd IAT Std",
    "Fwd IAT Max",
    "Fwd IAT Min",
    "Bwd IAT Total",
    "Bwd IAT Mean",
    "Bwd IAT Std",
    "Bwd IAT Max",
    "Bwd IAT Min",
    "Fwd PSH Flags",
    "Bwd PSH Flags",
    "Fwd URG Flags",
    "Bwd URG Flags",
    "Fwd Header Length",
    "Bwd Header Length",
    "Fwd Packets/s",
    "Bwd Packets/s",
    "Min Packet Length",
    "Max Packet Length",
    "Packet Length Mean",
    "Packet Length Std",
    "Packet Length Variance",
    "FIN Flag Count",
    "SYN Flag Count",
    "RST Flag Count",
    "PSH Flag Count",
    "ACK Flag Count",
    "URG Flag Count",
    "CWE Flag Count",
    "ECE Flag Count",
    "Down/Up Ratio",
    "Average Packet Size",
    "Avg Fwd Segment Size",
    "Avg Bwd Segment Size",
    "Fwd Header Length.1",
    "Fwd Avg Bytes/Bulk",
    "Fwd Avg Packets/Bulk",
    "Fwd Avg Bulk Rate",
    "Bwd Avg Bytes/Bulk",
    "Bwd Avg Packets/Bulk",
    "Bwd Avg Bulk Rate",
    "Subflow Fwd Packets",
    "Subflow Fwd Bytes",
    "Subflow Bwd Packets",
    "Subflow Bwd Bytes",
    "Init_Win_bytes_forward",
    "Init_Win_bytes_backward",
    "act_data_pkt_fwd",
    "min_seg_size_forward",
    "Active Mean",
    "Active Std",
    "Active Max",
    "Active Min",
    "Idle Mean",
    "Idle Std",
    "Idle Max",
    "Idle Min",
    "SimillarHTTP",
    "Inbound",
    "Label",
];

pub const LABEL_COLUMN: &str = "Label";
pub const INDEX_COLUMN: &str = "Unnamed: 0";
pub const SOURCE_PORT: &str = "Source Port";
pub const DESTINATION_PORT: &str = "Destination Port";
pub const PROTOCOL: &str = "Protocol";

/// Identity columns that hold text rather than numbers.
pub const TEXT_COLUMNS: [&str; 5] =
    ["Flow ID", "Source IP", "Destination IP", "Timestamp", "SimillarHTTP"];

/// Rate columns; zero-duration flows turn these into divide-by-zero artifacts.
pub const RATE_COLUMNS: [&str; 4] =
    ["Flow Bytes/s", "Flow Packets/s", "Fwd Packets/s", "Bwd Packets/s"];

/// Columns removed before modeling unless configured otherwise.
pub const DEFAULT_DROP: [&str; 3] = [INDEX_COLUMN, SOURCE_PORT, DESTINATION_PORT];

/// Numeric flow-statistic columns: everything except the index, text
/// identity columns, ports, protocol and label.
pub fn flow_feature_columns() -> Vec<&'static str> {
    CIC_HEADER
        .iter()
        .copied()
        .filter(|c| {
            *c != INDEX_COLUMN
                && *c != SOURCE_PORT
                && *c != DESTINATION_PORT
                && *c != PROTOCOL
                && *c != LABEL_COLUMN
                && !TEXT_COLUMNS.contains(c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_shape() {
        assert_eq!(CIC_HEADER.len(), 88);
        assert_eq!(flow_feature_columns().len(), 88 - 10);
        let mut sorted = CIC_HEADER.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 88);
    }
}
