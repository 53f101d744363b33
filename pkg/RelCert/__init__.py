from .orchestrator import Orchestrator

orchestrator = Orchestrator()
ConfigurationManager = orchestrator.get_config_manager()

from .groups import GroupSpec, Element, parse_group_spec, element, ball
from .coset_space import CosetSpace, SubgroupSpec, build_coset_space, act, rho
from .certificates import CertParams, Convention, verify, load_certificate, save_certificate
from .pipeline import PipelineBuilder, transfer_pipeline
from .scenario import run_scenario, verify_file
