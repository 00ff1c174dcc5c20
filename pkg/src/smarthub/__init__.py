"""smarthub — a self-hostable smart-home hub.

Subsystems:

- ``registry``: typed entities, live state, named locations with privacy controls
- ``automation``: trigger / condition / action rules with a dry-run tester
- ``adapters``: MQTT / CoAP / HTTP device endpoints plus a simulated-device harness
- ``security``: password policy, MFA sessions, request firewall, alert fan-out
- ``eventlog``: append-only audit log with period queries, retention and export
- ``attacks``: scripted attack scenarios driven through the full defense stack
- ``api``: the HTTP service tying everything together
"""

__version__ = "0.1.0"
