from subatomic_kernel.tools.terms import TERMS_TOOLS, handle_terms_tool
from subatomic_kernel.tools.systems import SYSTEMS_TOOLS, handle_systems_tool
from subatomic_kernel.tools.proofs import PROOFS_TOOLS, handle_proofs_tool
from subatomic_kernel.tools.split import SPLIT_TOOLS, handle_split_tool
from subatomic_kernel.tools.interp import INTERP_TOOLS, handle_interp_tool
from subatomic_kernel.tools.oracle import ORACLE_TOOLS, handle_oracle_tool

__all__ = [
    "TERMS_TOOLS",
    "handle_terms_tool",
    "SYSTEMS_TOOLS",
    "handle_systems_tool",
    "PROOFS_TOOLS",
    "handle_proofs_tool",
    "SPLIT_TOOLS",
    "handle_split_tool",
    "INTERP_TOOLS",
    "handle_interp_tool",
    "ORACLE_TOOLS",
    "handle_oracle_tool",
]
