class Idle extends State {
    void powerOn() {
        new Heating();
        send("warmup");
    }
}
