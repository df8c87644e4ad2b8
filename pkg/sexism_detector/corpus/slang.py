"""
Slang table loading.
"""
import logging
from pathlib import Path
from typing import Dict, Optional, Union

from sexism_detector.utils.exceptions import CorpusError

logger = logging.getLogger(__name__)

DEFAULT_SLANG_PATH = Path(__file__).parent.parent / "resources" / "slang_map.tsv"


def load_slang_map(path: Optional[Union[str, Path]] = None) -> Dict[str, str]:
    """
    Load a slang table in `slang<TAB>replacement` format.

    Args:
        path: TSV file; the bundled table when omitted

    Returns:
        Mapping of lowercased slang token to lowercased replacement

    Raises:
        CorpusError: If the file is missing or a line is malformed
    """
    slang_path = Path(path) if path else DEFAULT_SLANG_PATH
    try:
        lines = slang_path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as e:
        raise CorpusError(f"Slang map not found: {slang_path}") from e

    table: Dict[str, str] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            raise CorpusError(f"Malformed slang map line {line_no} in {slang_path}: {line!r}")
        slang, replacement = fields[0].strip().lower(), " ".join(fields[1].lower().split())
        if any(ch.isspace() for ch in slang):
            raise CorpusError(f"Slang key on line {line_no} must be a single token: {slang!r}")
        if slang in table:
            logger.warning(f"Slang key '{slang}' repeated on line {line_no}; keeping the later value")
        table[slang] = replacement

    chained = [k for k, v in table.items() if any(part in table for part in v.split())]
    if chained:
        logger.warning(f"Slang replacements that are themselves slang keys: {sorted(chained)}")

    logger.info(f"Loaded {len(table)} slang pairs from {slang_path}")
    return table
