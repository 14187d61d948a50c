"""Column layout and attack taxonomy of the NSL-KDD distribution files.

KDDTrain+.txt / KDDTest+.txt ship without a header; each row is 41 features, the
raw attack name and a difficulty score.
"""

NSL_KDD_COLUMNS = [
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes",
    "land", "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in",
    "num_compromised", "root_shell", "su_attempted", "num_root",
    "num_file_creations", "num_shells", "num_access_files", "num_outbound_cmds",
    "is_host_login", "is_guest_login", "count", "srv_count", "serror_rate",
    "srv_serror_rate", "rerror_rate", "srv_rerror_rate", "same_srv_rate",
    "diff_srv_rate", "srv_diff_host_rate", "dst_host_count", "dst_host_srv_count",
    "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate", "dst_host_srv_serror_rate", "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate", "label", "difficulty",
]  # fmt: skip

NSL_KDD_LABEL_COLUMN = "label"
NSL_KDD_IGNORED_COLUMNS = ["difficulty"]
NSL_KDD_BENIGN_LABEL = "normal"

_CLASSES = {
    "DoS": [
        "apache2", "back", "land", "mailbomb", "neptune", "pod", "processtable",
        "smurf", "teardrop", "udpstorm",
    ],
    "Probe": ["ipsweep", "mscan", "nmap", "portsweep", "saint", "satan"],
    "R2L": [
        "ftp_write", "guess_passwd", "imap", "multihop", "named", "phf",
        "sendmail", "snmpgetattack", "snmpguess", "spy", "warezclient",
        "warezmaster", "worm", "xlock", "xsnoop",
    ],
    "U2R": [
        "buffer_overflow", "httptunnel", "loadmodule", "perl", "ps", "rootkit",
        "sqlattack", "xterm",
    ],
}  # fmt: skip

NSL_KDD_CLASS_MAP: dict[str, str] = {
    NSL_KDD_BENIGN_LABEL: NSL_KDD_BENIGN_LABEL,
    **{raw: cls for cls, raws in _CLASSES.items() for raw in raws},
}
