class Heating extends AbstractDevice {
    void watch() {
        switch (status) {
            case OVERHEAT:
                new Error();
            case READY:
                new Active();
                send("ready");
        }
    }
}
