"""Water-sampling maintenance workbench.

Reference data and domain types live in :mod:`aquasampler.domain`; the
ontology-backed knowledge base in :mod:`aquasampler.kb`; worksheet and label
handling in :mod:`aquasampler.ingestion`; the check-in workflow engine in
:mod:`aquasampler.workflow`; route clustering/sequencing in
:mod:`aquasampler.sequencer`; progress statistics in
:mod:`aquasampler.analysis`; and the HTTP service plus CLI in
:mod:`aquasampler.service` / :mod:`aquasampler.cli`.
"""

__version__ = "0.1.0"
