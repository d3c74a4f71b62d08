import sys

from pdbs.main import main

sys.exit(main())
