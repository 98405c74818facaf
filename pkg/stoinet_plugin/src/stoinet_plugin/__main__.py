import sys

from stoinet_plugin.cli import main

sys.exit(main())
