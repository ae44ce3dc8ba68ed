"""
Provides DenylistFactory for loading denylist triples from N-Triples and JSON
files and assembling them into a single Denylist.
"""

import json
import os

from stage_tools.errors import ConfigurationError
from stages.IngestStage.baseclass import TermKind
from stages.IngestStage.stage import IngestStage
from stages.SelectStage.baseclass import Denylist


class DenylistFactory:
    """
    Factory for loading and assembling denylists.
    """

    def read_ntriples_file(self, file_path):
        """
        Extracts ground IRI triples from an N-Triples file.
        """
        with open(file_path, "r", encoding="utf-8") as f:
            store = IngestStage.ingest_text(f.read())
        if store.report.skipped:
            raise ConfigurationError(f"{file_path}: {store.report.skipped} malformed denylist lines")
        triples = []
        for s, p, o in store:
            terms = [store.lookup(x) for x in (s, p, o)]
            if any(t.kind is not TermKind.IRI for t in terms):
                raise ConfigurationError(f"{file_path}: denylist triples must use IRIs only")
            triples.append(tuple(t.lexical for t in terms))
        return triples

    def read_json_file(self, file_path):
        """
        Reads a JSON list of [subject, predicate, object] IRI triples.
        """
        with open(file_path, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"{file_path}: invalid JSON: {e.msg}") from None
        if not isinstance(data, list):
            raise ConfigurationError(f"{file_path}: expected a list of triples")
        return [tuple(t) for t in data]

    def load_denylist_content(self, file_path):
        """
        Reads denylist triples from a file based on its extension.
        Supports '.nt' and '.json' files.
        """
        if not file_path or str(file_path).strip() == "":
            raise ConfigurationError("denylist file name is empty")
        if not os.path.exists(file_path):
            raise ConfigurationError(f"File not found: {file_path}")

        _, extension = os.path.splitext(str(file_path))
        extension = extension.lower()
        if extension == ".nt":
            return self.read_ntriples_file(file_path)
        if extension == ".json":
            return self.read_json_file(file_path)
        raise ConfigurationError(f"Unsupported denylist file type: {extension}")

    def get_default_denylist(self):
        """
        Loads the denylist shipped in the denylist_library folder.
        """
        current_file_directory = os.path.dirname(os.path.abspath(__file__))
        default_file = os.path.join(current_file_directory, "denylist_library", "DefaultDenylist.nt")
        return Denylist().extended(self.load_denylist_content(default_file))

    def get_denylist(self, extra_files=(), extra_triples=()):
        """
        Default denylist extended with user-supplied files and triples.
        """
        denylist = self.get_default_denylist()
        for file_path in extra_files:
            denylist = denylist.extended(self.load_denylist_content(file_path))
        return denylist.extended(extra_triples)


if __name__ == "__main__":
    for triple in sorted(DenylistFactory().get_default_denylist().triples):
        print(" ".join(f"<{x}>" for x in triple), ".")
