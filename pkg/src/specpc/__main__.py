from specpc.cli import main
import sys
sys.exit(main())
