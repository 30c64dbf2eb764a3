"""Delegated credential issuance: SSS template grants, multisig baseline, simulation."""

from .grant import (Delegate, DelegateSecrets, DelegationGrant, EventKind, IssuedCredential, Reason,
                    RegistryEvent, ShareRegistry, Verdict, delegate_issue, grant_create, registry_record,
                    trace_reconstruct, verify_grant, verify_issued)
from .multisig import (Finalize, MultisigState, Propose, Review, State, draft, multisig_step,
                       multisig_verify)
from .simulator import LatencyModel, SimulationReport, periodic_downtime, simulate
